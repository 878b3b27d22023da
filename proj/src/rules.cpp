#include "certlab/rules.hpp"

#include <set>
#include <sstream>

#include "embedded_data.hpp"
#include "regex_util.hpp"

namespace certlab::rules {

RulesParseError::RulesParseError(std::string group, std::size_t pattern_index,
                                 const std::string& what)
    : Error("rules group '" + group + "', pattern " + std::to_string(pattern_index) + ": " + what),
      group_(std::move(group)),
      pattern_index_(pattern_index) {}

struct RuleSet::Compiled {
  std::vector<RuleGroup> groups;
  std::vector<std::vector<boost::regex>> regexes;
};

RuleSet::RuleSet(std::vector<RuleGroup> groups) {
  auto compiled = std::make_shared<Compiled>();
  std::set<std::string> seen;
  for (const auto& group : groups) {
    if (!seen.insert(group.name).second) {
      throw RulesParseError(group.name, 0, "duplicate group name");
    }
    std::vector<boost::regex> regexes;
    for (std::size_t i = 0; i < group.patterns.size(); ++i) {
      try {
        regexes.push_back(detail::compile_pattern(group.patterns[i], group.case_insensitive));
      } catch (const boost::regex_error& e) {
        throw RulesParseError(group.name, i, e.what());
      }
    }
    compiled->regexes.push_back(std::move(regexes));
  }
  compiled->groups = std::move(groups);
  compiled_ = std::move(compiled);
}

const std::vector<RuleGroup>& RuleSet::groups() const {
  static const std::vector<RuleGroup> none;
  return compiled_ ? compiled_->groups : none;
}

std::vector<std::string> RuleSet::group_names() const {
  std::vector<std::string> names;
  for (const auto& g : groups()) names.push_back(g.name);
  return names;
}

GroupHits RuleSet::extract(std::string_view text) const {
  GroupHits hits;
  if (!compiled_ || text.empty()) return hits;
  for (std::size_t g = 0; g < compiled_->groups.size(); ++g) {
    MatchCounts counts;
    for (const auto& re : compiled_->regexes[g]) {
      boost::cregex_iterator it(text.data(), text.data() + text.size(), re);
      for (; it != boost::cregex_iterator{}; ++it) {
        auto normalized = collapse_whitespace((*it)[0].str());
        if (normalized.empty()) continue;
        ++counts[normalized];
      }
    }
    if (!counts.empty()) hits.emplace(compiled_->groups[g].name, std::move(counts));
  }
  return hits;
}

RuleSet parse_rules(std::string_view text) {
  std::vector<RuleGroup> groups;
  std::istringstream in{std::string(text)};
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto stripped = trim(line);
    if (stripped.empty() || stripped.front() == '#') continue;

    const bool indented = line.front() == ' ' || line.front() == '\t';
    if (indented) {
      if (groups.empty()) {
        throw RulesParseError("", 0, "pattern before any group header at line " + std::to_string(line_no));
      }
      groups.back().patterns.push_back(stripped);
      continue;
    }

    const auto colon = stripped.find(':');
    if (colon == std::string::npos || colon == 0) {
      throw RulesParseError(stripped, 0, "expected 'group_name:' at line " + std::to_string(line_no));
    }
    RuleGroup group;
    group.name = trim(stripped.substr(0, colon));
    for (const auto& flag : split_whitespace(stripped.substr(colon + 1))) {
      if (flag == "case_insensitive") {
        group.case_insensitive = true;
      } else {
        throw RulesParseError(group.name, 0, "unknown flag '" + flag + "'");
      }
    }
    groups.push_back(std::move(group));
  }
  return RuleSet(std::move(groups));
}

RuleSet load_rules(const std::string& path) { return parse_rules(read_file(path)); }

const RuleSet& default_rules() {
  static const RuleSet rules = parse_rules(data::default_rules());
  return rules;
}

GroupHits extract(std::string_view text, const RuleSet& rules) { return rules.extract(text); }

void FeatureHits::merge(DocKind kind, const GroupHits& hits) {
  auto& target = per_source[kind];
  for (const auto& [group, counts] : hits) {
    auto& dst = target[group];
    for (const auto& [match, n] : counts) dst[match] += n;
  }
}

}  // namespace certlab::rules
