#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "certlab/common.hpp"

namespace certlab::refgraph {

class UnknownSeed : public Error {
 public:
  using Error::Error;
};

using Provenance = std::set<DocKind>;

struct Edge {
  std::string src;
  std::string dst;
  Provenance provenance;

  friend bool operator==(const Edge&, const Edge&) = default;
};

enum class Direction { in, out, both };

Direction direction_from_string(std::string_view text);

/// Directed graph over canonical certificate IDs. Edge A -> B means A's
/// artifacts mention B. Immutable once built.
class ReferenceGraph {
 public:
  ReferenceGraph() = default;

  /// Throws if an edge is a self-loop or names an unknown node.
  ReferenceGraph(std::set<std::string> nodes, std::vector<Edge> edges);

  const std::set<std::string>& nodes() const { return nodes_; }
  /// Sorted by (src, dst).
  std::vector<Edge> edges() const;
  std::size_t edge_count() const { return edges_.size(); }

  bool contains(const std::string& node) const { return nodes_.count(node) != 0; }
  const Provenance* edge(const std::string& src, const std::string& dst) const;

  const std::set<std::string>& successors(const std::string& node) const;
  const std::set<std::string>& predecessors(const std::string& node) const;
  std::size_t in_degree(const std::string& node) const { return predecessors(node).size(); }
  std::size_t out_degree(const std::string& node) const { return successors(node).size(); }

  friend bool operator==(const ReferenceGraph& a, const ReferenceGraph& b) {
    return a.nodes_ == b.nodes_ && a.edges_ == b.edges_;
  }

 private:
  std::set<std::string> nodes_;
  std::map<std::pair<std::string, std::string>, Provenance> edges_;
  std::map<std::string, std::set<std::string>> out_;
  std::map<std::string, std::set<std::string>> in_;
};

/// canonical ID -> record keys carrying it
using IdIndex = std::map<std::string, std::set<std::string>>;
/// record key -> document kind -> texts of that kind
using ArtifactTexts = std::map<std::string, std::map<DocKind, std::vector<std::string>>>;

/// Scans every certificate's artifacts with all scheme patterns and links it
/// to each other certificate whose canonical ID appears there.
ReferenceGraph build_graph(const IdIndex& id_index, const ArtifactTexts& texts);

/// Nodes that reach any seed over at most `depth` edges (unbounded when
/// empty), excluding the seeds.
std::set<std::string> impacted_by(const ReferenceGraph& graph, const std::set<std::string>& seeds,
                                  std::optional<std::size_t> depth = std::nullopt);

/// Induced subgraph on the nodes within `depth` hops of `node`.
ReferenceGraph neighborhood(const ReferenceGraph& graph, const std::string& node, Direction direction,
                            std::optional<std::size_t> depth);

}  // namespace certlab::refgraph
