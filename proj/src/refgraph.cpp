#include "certlab/refgraph.hpp"

#include <deque>

#include "certlab/certid.hpp"

namespace certlab::refgraph {

Direction direction_from_string(std::string_view text) {
  if (text == "in") return Direction::in;
  if (text == "out") return Direction::out;
  if (text == "both" || text.empty()) return Direction::both;
  throw Error("direction must be in, out or both, got '" + std::string(text) + "'");
}

ReferenceGraph::ReferenceGraph(std::set<std::string> nodes, std::vector<Edge> edges) : nodes_(std::move(nodes)) {
  for (auto& e : edges) {
    if (e.src == e.dst) throw Error("self-loop on " + e.src);
    if (!nodes_.count(e.src) || !nodes_.count(e.dst)) {
      throw Error("edge " + e.src + " -> " + e.dst + " references an unknown node");
    }
    auto& prov = edges_[{e.src, e.dst}];
    prov.insert(e.provenance.begin(), e.provenance.end());
    out_[e.src].insert(e.dst);
    in_[e.dst].insert(e.src);
  }
}

std::vector<Edge> ReferenceGraph::edges() const {
  std::vector<Edge> out;
  out.reserve(edges_.size());
  for (const auto& [key, prov] : edges_) out.push_back({key.first, key.second, prov});
  return out;
}

const Provenance* ReferenceGraph::edge(const std::string& src, const std::string& dst) const {
  auto it = edges_.find({src, dst});
  return it == edges_.end() ? nullptr : &it->second;
}

const std::set<std::string>& ReferenceGraph::successors(const std::string& node) const {
  static const std::set<std::string> none;
  auto it = out_.find(node);
  return it == out_.end() ? none : it->second;
}

const std::set<std::string>& ReferenceGraph::predecessors(const std::string& node) const {
  static const std::set<std::string> none;
  auto it = in_.find(node);
  return it == in_.end() ? none : it->second;
}

ReferenceGraph build_graph(const IdIndex& id_index, const ArtifactTexts& texts) {
  std::set<std::string> nodes;
  std::map<std::string, std::string> id_of_record;
  for (const auto& [canonical, keys] : id_index) {
    nodes.insert(canonical);
    for (const auto& key : keys) id_of_record[key] = canonical;
  }

  std::map<std::pair<std::string, std::string>, Provenance> found;
  for (const auto& [record_key, by_kind] : texts) {
    auto self = id_of_record.find(record_key);
    if (self == id_of_record.end()) continue;
    for (const auto& [kind, docs] : by_kind) {
      for (const auto& text : docs) {
        for (const auto& hit : certid::scan_ids(text)) {
          auto id = certid::try_canonicalize(hit.raw, hit.scheme);
          if (!id || id->canonical == self->second || !nodes.count(id->canonical)) continue;
          found[{self->second, id->canonical}].insert(kind);
        }
      }
    }
  }

  std::vector<Edge> edges;
  for (auto& [key, prov] : found) edges.push_back({key.first, key.second, std::move(prov)});
  return ReferenceGraph(std::move(nodes), std::move(edges));
}

namespace {

void check_known(const ReferenceGraph& graph, const std::string& node) {
  if (!graph.contains(node)) throw UnknownSeed("unknown certificate ID: " + node);
}

std::map<std::string, std::size_t> bfs(const ReferenceGraph& graph, const std::set<std::string>& starts,
                                       Direction direction, std::optional<std::size_t> depth) {
  std::map<std::string, std::size_t> dist;
  std::deque<std::string> queue;
  for (const auto& s : starts) {
    dist[s] = 0;
    queue.push_back(s);
  }
  auto visit = [&](const std::string& next, std::size_t d) {
    if (dist.count(next)) return;
    dist[next] = d;
    queue.push_back(next);
  };
  while (!queue.empty()) {
    const auto node = queue.front();
    queue.pop_front();
    const auto d = dist[node];
    if (depth && d >= *depth) continue;
    if (direction != Direction::out) {
      for (const auto& p : graph.predecessors(node)) visit(p, d + 1);
    }
    if (direction != Direction::in) {
      for (const auto& s : graph.successors(node)) visit(s, d + 1);
    }
  }
  return dist;
}

}  // namespace

std::set<std::string> impacted_by(const ReferenceGraph& graph, const std::set<std::string>& seeds,
                                  std::optional<std::size_t> depth) {
  for (const auto& s : seeds) check_known(graph, s);
  std::set<std::string> out;
  for (const auto& [node, d] : bfs(graph, seeds, Direction::in, depth)) {
    if (!seeds.count(node)) out.insert(node);
  }
  return out;
}

ReferenceGraph neighborhood(const ReferenceGraph& graph, const std::string& node, Direction direction,
                            std::optional<std::size_t> depth) {
  check_known(graph, node);
  std::set<std::string> nodes;
  for (const auto& [n, d] : bfs(graph, {node}, direction, depth)) nodes.insert(n);
  std::vector<Edge> edges;
  for (const auto& e : graph.edges()) {
    if (nodes.count(e.src) && nodes.count(e.dst)) edges.push_back(e);
  }
  return ReferenceGraph(std::move(nodes), std::move(edges));
}

}  // namespace certlab::refgraph
