#pragma once

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "certlab/common.hpp"

namespace certlab::rules {

/// Raised when a rules file is malformed or one of its patterns does not compile.
class RulesParseError : public Error {
 public:
  RulesParseError(std::string group, std::size_t pattern_index, const std::string& what);

  const std::string& group() const { return group_; }
  /// Zero-based index of the offending pattern within its group.
  std::size_t pattern_index() const { return pattern_index_; }

 private:
  std::string group_;
  std::size_t pattern_index_;
};

struct RuleGroup {
  std::string name;
  std::vector<std::string> patterns;
  bool case_insensitive = false;
};

/// match string -> occurrence count
using MatchCounts = std::map<std::string, std::size_t>;
/// group name -> match counts
using GroupHits = std::map<std::string, MatchCounts>;

/// Immutable, compiled rule groups. Cheap to copy and safe to share between threads.
class RuleSet {
 public:
  RuleSet() = default;
  explicit RuleSet(std::vector<RuleGroup> groups);

  const std::vector<RuleGroup>& groups() const;
  std::vector<std::string> group_names() const;
  bool empty() const { return groups().empty(); }

  GroupHits extract(std::string_view text) const;

 private:
  struct Compiled;
  std::shared_ptr<const Compiled> compiled_;
};

RuleSet parse_rules(std::string_view text);
RuleSet load_rules(const std::string& path);
/// Rules compiled into the library, covering every keyword category.
const RuleSet& default_rules();

/// Counts every non-overlapping match of every pattern, keyed by the
/// whitespace-normalized matched string.
GroupHits extract(std::string_view text, const RuleSet& rules);

/// Per-document-kind hits for one certificate.
struct FeatureHits {
  std::map<DocKind, GroupHits> per_source;

  void merge(DocKind kind, const GroupHits& hits);
};

}  // namespace certlab::rules
