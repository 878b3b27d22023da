#include <gtest/gtest.h>

#include <random>

#include "certlab/rules.hpp"

using namespace certlab;
using namespace certlab::rules;

TEST(DefaultRules, CoverTaxonomy) {
  const auto names = default_rules().group_names();
  EXPECT_EQ(names.size(), 33u);
  for (const char* expected : {"evaluation_level", "side_channel_attack", "sar", "cert_id", "symmetric_crypto",
                               "protection_profile_id", "vulnerability", "standard"}) {
    EXPECT_NE(std::find(names.begin(), names.end(), expected), names.end()) << expected;
  }
}

TEST(Extract, EvaluationLevel) {
  const auto hits = extract("certified to EAL2 and EAL2 augmented", default_rules());
  ASSERT_TRUE(hits.count("evaluation_level"));
  EXPECT_EQ(hits.at("evaluation_level"), (MatchCounts{{"EAL2", 2}}));
}

TEST(Extract, SarToken) {
  const auto hits = extract("the TOE meets AVA_VLA.4 requirements", default_rules());
  EXPECT_EQ(hits.at("sar"), (MatchCounts{{"AVA_VLA.4", 1}}));
}

TEST(Extract, EmptyText) { EXPECT_TRUE(extract("", default_rules()).empty()); }

TEST(Extract, SideChannel) {
  const auto hits = extract("resistant against DPA and SPA attacks", default_rules());
  ASSERT_TRUE(hits.count("side_channel_attack"));
  EXPECT_EQ(hits.at("side_channel_attack").at("DPA"), 1u);
}

TEST(Extract, NonOverlappingAndWhitespaceCollapsed) {
  const auto rules = parse_rules("g:\n  aa\nh:\n  foo\\s+bar\n");
  const auto hits = extract("aaaaa foo \n  bar", rules);
  EXPECT_EQ(hits.at("g").at("aa"), 2u);
  EXPECT_EQ(hits.at("h").at("foo bar"), 1u);
}

TEST(Extract, CaseFlagPerGroup) {
  const auto rules = parse_rules("strict:\n  aes\nloose: case_insensitive\n  aes\n");
  const auto hits = extract("AES aes Aes", rules);
  EXPECT_EQ(hits.at("strict").at("aes"), 1u);
  std::size_t total = 0;
  for (const auto& [k, n] : hits.at("loose")) total += n;
  EXPECT_EQ(total, 3u);
}

TEST(Extract, AdditiveAcrossLines) {
  const auto& rules = default_rules();
  const std::vector<std::string> lines = {"uses AES and RSA 2048", "EAL4+ with AVA_VAN.5", "ECDSA over P-256",
                                          "BSI-DSZ-CC-1052-2021", "SHA-256 hashing and DPA countermeasures",
                                          "nothing here"};
  std::mt19937 rng(3);
  for (int round = 0; round < 50; ++round) {
    std::string a, b;
    for (const auto& l : lines) (rng() % 2 ? a : b) += l + "\n";
    const auto ha = extract(a, rules), hb = extract(b, rules), hab = extract(a + b, rules);
    for (const auto& [group, counts] : hab) {
      for (const auto& [match, n] : counts) {
        std::size_t expected = 0;
        if (ha.count(group) && ha.at(group).count(match)) expected += ha.at(group).at(match);
        if (hb.count(group) && hb.at(group).count(match)) expected += hb.at(group).at(match);
        EXPECT_EQ(n, expected) << group << " " << match;
      }
    }
    EXPECT_EQ(extract(a + b, rules), hab);
  }
}

TEST(ParseRules, EmptyFile) {
  EXPECT_TRUE(parse_rules("").empty());
  EXPECT_TRUE(parse_rules("# only a comment\n\n").empty());
}

TEST(ParseRules, BadPatternNamesGroupAndIndex) {
  try {
    parse_rules("ok:\n  fine\nbroken:\n  good\n  (unbalanced\n");
    FAIL() << "expected RulesParseError";
  } catch (const RulesParseError& e) {
    EXPECT_EQ(e.group(), "broken");
    EXPECT_EQ(e.pattern_index(), 1u);
  }
}

TEST(ParseRules, StructuralErrors) {
  EXPECT_THROW(parse_rules("  orphan pattern\n"), RulesParseError);
  EXPECT_THROW(parse_rules("g: shouting\n  x\n"), RulesParseError);
  EXPECT_THROW(parse_rules("g:\n  a\ng:\n  b\n"), RulesParseError);
}

TEST(ParseRules, PythonNamedGroupsAccepted) {
  const auto rules = parse_rules("g:\n  ID-(?P<n>[0-9]+)\n");
  EXPECT_EQ(extract("ID-12 ID-7", rules).at("g").size(), 2u);
}

TEST(FeatureHits, MergeAddsCounts) {
  FeatureHits f;
  f.merge(DocKind::security_target, {{"g", {{"x", 1}}}});
  f.merge(DocKind::security_target, {{"g", {{"x", 2}, {"y", 1}}}});
  EXPECT_EQ(f.per_source.at(DocKind::security_target).at("g").at("x"), 3u);
  EXPECT_EQ(f.per_source.at(DocKind::security_target).at("g").at("y"), 1u);
}
