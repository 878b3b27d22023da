#include <gtest/gtest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include <unistd.h>

#include "certlab/snapshot.hpp"
#include "minicorpus.hpp"
#include "oracles.hpp"

using namespace certlab;
using namespace certlab::snapshot;

namespace {

const minicorpus::Loaded& v1() {
  static const auto loaded = minicorpus::load(1);
  return loaded;
}

const minicorpus::Loaded& v2() {
  static const auto loaded = minicorpus::load(2);
  return loaded;
}

const ingest::CertRecord& by_title(const Snapshot& s, const std::string& title) {
  for (const auto& r : s.records) {
    if (r.title == title) return r;
  }
  throw std::runtime_error("no record titled " + title);
}

std::vector<DiffEvent> of_kind(const std::vector<DiffEvent>& events, EventKind kind) {
  std::vector<DiffEvent> out;
  for (const auto& e : events) {
    if (e.kind == kind) out.push_back(e);
  }
  return out;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("certlab_" + name + "_" + std::to_string(::getpid()))).string();
}

}  // namespace

TEST(Diff, IdenticalSnapshotsHaveNoEvents) {
  EXPECT_TRUE(diff(v1().snapshot, v1().snapshot).empty());
  EXPECT_TRUE(diff(v2().snapshot, v2().snapshot).empty());
  EXPECT_TRUE(diff(Snapshot{}, Snapshot{}).empty());
}

TEST(Diff, MiniCorpusVersions) {
  const auto& a = v1().snapshot;
  const auto& b = v2().snapshot;
  const auto events = diff(a, b);
  ASSERT_TRUE(std::is_sorted(events.begin(), events.end()));

  const auto& fresh = by_title(b, "IDEMIA ID-One Cosmo v10 Platform");
  EXPECT_EQ(of_kind(events, EventKind::new_cert),
            (std::vector<DiffEvent>{{fresh.record_key, EventKind::new_cert, fresh.title}}));
  EXPECT_EQ(of_kind(events, EventKind::id_changed),
            (std::vector<DiffEvent>{{fresh.record_key, EventKind::id_changed, "none -> BSI-DSZ-CC-1099-2024"}}));

  const auto status = of_kind(events, EventKind::status_changed);
  ASSERT_EQ(status.size(), 1u);
  EXPECT_EQ(status[0].detail, "active -> archived");
  EXPECT_EQ(a.find(status[0].record_key)->status, ingest::CertStatus::active);

  const auto new_cves = of_kind(events, EventKind::new_cve);
  std::set<std::string> ids;
  for (const auto& e : new_cves) ids.insert(e.detail);
  EXPECT_EQ(ids, (std::set<std::string>{"CVE-2024-31001", "CVE-2024-31002"}));
  EXPECT_TRUE(of_kind(events, EventKind::removed_cve).empty());

  // The new platform cites an older chip; an updated ST adds a citation.
  const auto added = of_kind(events, EventKind::reference_added);
  std::set<std::string> citing;
  for (const auto& e : added) citing.insert(e.record_key);
  EXPECT_TRUE(citing.count(fresh.record_key));
  const auto& cisco = by_title(b, "Cisco IOS XE 16.9 on Catalyst Switches");
  EXPECT_TRUE(citing.count(cisco.record_key));
  EXPECT_TRUE(of_kind(events, EventKind::reference_removed).empty());

  // Reverse direction turns additions into removals.
  const auto back = diff(b, a);
  EXPECT_EQ(of_kind(back, EventKind::reference_removed).size(), added.size());
  EXPECT_EQ(of_kind(back, EventKind::removed_cve).size(), new_cves.size());
  EXPECT_TRUE(of_kind(back, EventKind::new_cert).empty());
}

TEST(Diff, ReplayReconstructsState) {
  const auto& a = v1().snapshot;
  const auto& b = v2().snapshot;
  EXPECT_EQ(apply_events(replay_state(a), diff(a, b)), replay_state(b));
  EXPECT_EQ(apply_events(replay_state(b), diff(b, a)), replay_state(a));
  EXPECT_EQ(apply_events(replay_state(a), {}), replay_state(a));
}

TEST(Diff, ReplayOnRandomEdits) {
  std::mt19937 rng(17);
  const auto& base = v1().snapshot;
  for (int round = 0; round < 20; ++round) {
    Snapshot edited = base;
    for (auto& [key, result] : edited.matches.results) {
      if (rng() % 3 == 0) result.cves.insert("CVE-2030-" + std::to_string(1000 + rng() % 20));
      if (!result.cves.empty() && rng() % 4 == 0) result.cves.erase(result.cves.begin());
    }
    const auto events = diff(base, edited);
    EXPECT_EQ(apply_events(replay_state(base), events), replay_state(edited)) << "round " << round;
  }
}

TEST(Diff, SchemaMismatch) {
  Snapshot other = v1().snapshot;
  other.schema_version = kSchemaVersion + 1;
  EXPECT_THROW(diff(v1().snapshot, other), SchemaMismatch);
}

TEST(Events, JsonRoundTrip) {
  const auto events = diff(v1().snapshot, v2().snapshot);
  EXPECT_EQ(events_from_json(events_to_json(events)), events);
  for (auto kind : {EventKind::new_cert, EventKind::new_cve, EventKind::removed_cve, EventKind::id_changed,
                    EventKind::reference_added, EventKind::reference_removed, EventKind::status_changed}) {
    EXPECT_EQ(event_kind_from_string(to_string(kind)), kind);
  }
  EXPECT_THROW(event_kind_from_string("exploded"), Error);
  EXPECT_THROW(events_from_json(nlohmann::json::object()), SchemaError);
}

TEST(SnapshotJson, RoundTrip) {
  const auto& s = v1().snapshot;
  const auto back = snapshot_from_json(to_json(s));
  EXPECT_EQ(back.created, s.created);
  EXPECT_EQ(back.records.size(), s.records.size());
  EXPECT_EQ(back.graph.edges(), s.graph.edges());
  EXPECT_EQ(back.report, s.report);
  EXPECT_TRUE(diff(s, back).empty());
  EXPECT_EQ(to_json(back), to_json(s));
  EXPECT_EQ(back.snapshot_date(), parse_date("2024-06-30"));
}

TEST(SnapshotJson, SaveAndLoad) {
  const auto path = temp_path("snapshot.json");
  save_snapshot(path, v1().snapshot);
  const auto back = load_snapshot(path);
  EXPECT_EQ(to_json(back), to_json(v1().snapshot));
  std::remove(path.c_str());
}

TEST(SnapshotJson, Rejections) {
  auto j = to_json(v1().snapshot);
  auto wrong = j;
  wrong["schema_version"] = kSchemaVersion + 1;
  EXPECT_THROW(snapshot_from_json(wrong), SchemaMismatch);

  auto dangling = j;
  ASSERT_FALSE(dangling["ids"].empty());
  dangling["records"].erase(0);
  EXPECT_THROW(snapshot_from_json(dangling), SchemaError);
}

TEST(Wildcard, Examples) {
  const std::vector<std::string> doc = {"the", "infineon", "rsa", "library", "v1.02.013"};
  EXPECT_TRUE(WildcardQuery("RSA").matches(doc));
  EXPECT_TRUE(WildcardQuery("rsa lib*").matches(doc));
  EXPECT_FALSE(WildcardQuery("rsa the").matches(doc));
  EXPECT_TRUE(WildcardQuery("v1.02.01?").matches(doc));
  EXPECT_FALSE(WildcardQuery("v1.02.0?").matches(doc));
  EXPECT_TRUE(WildcardQuery("*").matches(doc));
  EXPECT_FALSE(WildcardQuery("*").matches({}));
  EXPECT_TRUE(WildcardQuery("in*on").matches(doc));
  EXPECT_TRUE(WildcardQuery("a+b").matches({"a+b"}));
  EXPECT_FALSE(WildcardQuery("a+b").matches({"aab"}));
  EXPECT_EQ(WildcardQuery("  two   terms ").term_count(), 2u);
  EXPECT_THROW(WildcardQuery(""), BadQuery);
  EXPECT_THROW(WildcardQuery("   "), BadQuery);
}

TEST(FullText, EqualsLinearScanOracle) {
  const auto& texts = v1().texts;
  const FullTextIndex index(texts);
  const std::vector<std::string> queries = {
      "infineon", "RSA Library", "rsa lib*", "BSI-DSZ-CC-*", "*-CC-10?3-*", "eal?", "ava_van.5",
      "security target", "smart*", "cisco ios", "?", "a*", "zzz-not-there", "common criteria", "jcop 4.7",
      "ANSSI-CC-20?4/*", "the * of",
  };
  for (const auto& q : queries) {
    std::vector<SearchHit> expected;
    for (const auto& [key, docs] : texts) {
      SearchHit hit{key, {}};
      for (const auto& [kind, files] : docs) {
        for (const auto& text : files) {
          if (oracle::fulltext_match(q, text)) hit.doc_kinds.insert(kind);
        }
      }
      if (!hit.doc_kinds.empty()) expected.push_back(hit);
    }
    EXPECT_EQ(index.search(q), expected) << q;
  }
  EXPECT_FALSE(index.search("infineon").empty());
  EXPECT_TRUE(index.search("zzz-not-there").empty());
  EXPECT_THROW(index.search(""), BadQuery);
}

TEST(Selector, ParseAndMatch) {
  const DiffEvent cve_event{"k1", EventKind::new_cve, "CVE-2024-0001"};
  const DiffEvent ref_event{"k1", EventKind::reference_added, "CVE-2024-0001"};
  const DiffEvent other{"k2", EventKind::new_cve, "CVE-2024-0002"};

  const auto by_key = Selector::parse("record_key=k1");
  EXPECT_TRUE(by_key.matches(cve_event));
  EXPECT_FALSE(by_key.matches(other));
  const auto by_cve = Selector::parse("cve=CVE-2024-0001");
  EXPECT_TRUE(by_cve.matches(cve_event));
  EXPECT_FALSE(by_cve.matches(ref_event));
  EXPECT_FALSE(by_cve.matches(other));
  const auto both = Selector::parse("kind=new_cve&record_key=k2");
  EXPECT_TRUE(both.matches(other));
  EXPECT_FALSE(both.matches(cve_event));

  EXPECT_THROW(Selector::parse(""), BadSelector);
  EXPECT_THROW(Selector::parse("colour=red"), BadSelector);
  EXPECT_THROW(Selector::parse("kind=exploded"), BadSelector);
  EXPECT_THROW(Selector::parse("record_key"), BadSelector);
}

TEST(Subscriptions, LogSinkAndCounts) {
  const auto log = temp_path("events.log");
  std::remove(log.c_str());
  SubscriptionRegistry registry;
  const auto refs = registry.subscribe("kind=reference_added", "log:" + log);
  const auto cves = registry.subscribe("kind=new_cve", std::unique_ptr<Sink>{});
  EXPECT_EQ(registry.size(), 2u);

  const auto all = diff(v1().snapshot, v2().snapshot);
  const auto events = of_kind(all, EventKind::reference_added);
  const auto delivered = registry.notify(all);
  const auto cve_count = of_kind(all, EventKind::new_cve).size();
  EXPECT_EQ(delivered, events.size() + cve_count);
  EXPECT_EQ(registry.deliveries(refs).size(), events.size());
  EXPECT_EQ(registry.deliveries(cves).size(), cve_count);
  EXPECT_EQ(registry.failed_deliveries(), 0u);

  std::ifstream in(log);
  std::vector<DiffEvent> logged;
  for (std::string line; std::getline(in, line);) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_EQ(j.at("subscription"), refs);
    logged.push_back({j.at("record_key"), event_kind_from_string(j.at("kind").get<std::string>()), j.at("detail")});
  }
  EXPECT_EQ(logged, events);
  std::remove(log.c_str());
}

TEST(Subscriptions, FailingSinkIsCounted) {
  SubscriptionRegistry registry;
  const auto id = registry.subscribe("kind=new_cert", "log:/nonexistent-dir/certlab/events.log");
  EXPECT_EQ(registry.notify({{"k", EventKind::new_cert, "t"}}), 0u);
  EXPECT_EQ(registry.failed_deliveries(), 1u);
  EXPECT_TRUE(registry.deliveries(id).empty());
}

TEST(Subscriptions, BadSpecs) {
  SubscriptionRegistry registry;
  EXPECT_THROW(registry.subscribe("kind=new_cert", "smoke-signal"), BadSelector);
  EXPECT_THROW(registry.subscribe("kind=new_cert", "webhook:ftp://host/x"), BadSelector);
  EXPECT_THROW(registry.subscribe("kind=new_cert", "log:"), BadSelector);
  EXPECT_THROW(registry.subscribe("nope=1", "log:/tmp/x"), BadSelector);
  EXPECT_EQ(registry.size(), 0u);
  EXPECT_NO_THROW(make_sink("webhook:http://127.0.0.1:9"));
}
