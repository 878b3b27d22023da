#include <gtest/gtest.h>

#include "certlab/vulnmap.hpp"
#include "cpe_fixtures.hpp"
#include "minicorpus.hpp"

using namespace certlab;
using namespace certlab::vulnmap;
using cpe_fixtures::record;
using cpe_fixtures::uri;

TEST(Cpe, ParseAndSerialize) {
  const auto cpe = CpeEntry::parse("cpe:2.3:o:ibm:z\\/os:2.4:*:*:*:*:*:*:*");
  EXPECT_EQ(cpe.part, "o");
  EXPECT_EQ(cpe.vendor, "ibm");
  EXPECT_EQ(cpe.product, "z\\/os");
  EXPECT_EQ(cpe.version, "2.4");
  EXPECT_EQ(cpe.rest.size(), 7u);
  EXPECT_EQ(cpe.serialize(), cpe.uri);
  EXPECT_EQ(CpeEntry::parse("cpe:2.3:a:x:y\\:z:1.0:*:*:*:*:*:*:*").product, "y\\:z");

  EXPECT_THROW(CpeEntry::parse("cpe:/a:x:y:1.0"), SchemaError);
  EXPECT_THROW(CpeEntry::parse("cpe:2.3:a:x:y:1.0"), SchemaError);
  EXPECT_THROW(CpeEntry::parse("cpe:2.3:a::y:1.0:*:*:*:*:*:*:*"), SchemaError);
}

TEST(Cve, ParseLine) {
  const auto cve = parse_cve_line("CVE-2017-15361|2017-10-16|5.9|CWE-310|" + uri("infineon", "rsa_library", "1.02.013") +
                                  "," + uri("infineon", "rsa_library", "1.02.014"));
  EXPECT_EQ(cve.id, "CVE-2017-15361");
  EXPECT_EQ(format_date(cve.published), "2017-10-16");
  EXPECT_DOUBLE_EQ(cve.base_score, 5.9);
  EXPECT_EQ(cve.cwe_ids, (std::set<std::string>{"CWE-310"}));
  EXPECT_EQ(cve.vulnerable_cpes.size(), 2u);

  EXPECT_TRUE(parse_cve_line("CVE-2020-0001|2020-01-01|0||").vulnerable_cpes.empty());
  EXPECT_THROW(parse_cve_line("CVE-2020-0001|2020-01-01|5.0|"), SchemaError);
  EXPECT_THROW(parse_cve_line("CVE-20-1|2020-01-01|5.0||"), SchemaError);
  EXPECT_THROW(parse_cve_line("CVE-2020-0001|2020-01-01|10.5||"), SchemaError);
  EXPECT_THROW(parse_cve_line("CVE-2020-0001|2020-01-01|high||"), SchemaError);
  EXPECT_THROW(parse_cve_line("CVE-2020-0001|2020-02-30|5.0||"), SchemaError);
}

TEST(Nvd, Indices) {
  const auto nvd = parse_nvd(uri("acme", "router", "2.0") + "\n" + uri("Acme_Corp", "gate", "1.0") + "\n",
                             "CVE-2020-0001|2020-01-01|5.0|CWE-79|" + uri("acme", "router", "2.0") + "\n");
  EXPECT_EQ(nvd.cpes_of_vendor("acme").size(), 1u);
  EXPECT_EQ(nvd.cpes_of_vendor("acme_corp").size(), 1u);
  EXPECT_TRUE(nvd.cpes_of_vendor("nobody").empty());
  EXPECT_EQ(nvd.cves_of_cpe(uri("acme", "router", "2.0")), (std::set<std::string>{"CVE-2020-0001"}));
  ASSERT_NE(nvd.cve("CVE-2020-0001"), nullptr);
  EXPECT_EQ(nvd.cve("CVE-2099-0001"), nullptr);
}

TEST(Vendor, Normalize) {
  EXPECT_EQ(normalize_vendor("Acme Corp"), "acme_corp");
  EXPECT_EQ(normalize_vendor("  ACME,  Inc. "), "acme_inc");
  EXPECT_EQ(normalize_vendor("nxp_semiconductors"), "nxp_semiconductors");
  EXPECT_EQ(normalize_vendor("Giesecke+Devrient"), "gieseckedevrient");
  EXPECT_EQ(normalize_vendor(""), "");
}

TEST(Vendor, Aliases) {
  const auto aliases = VendorAliases::parse("# comment\nNXP_Semiconductors nxp\nNXP_Semiconductors NXP_B.V.\n\n");
  EXPECT_EQ(aliases.cpe_vendors_for("NXP Semiconductors"),
            (std::set<std::string>{"nxp", "nxp_bv", "nxp_semiconductors"}));
  EXPECT_EQ(aliases.cpe_vendors_for("Other"), (std::set<std::string>{"other"}));
  EXPECT_THROW(VendorAliases::parse("only_one_field\n"), SchemaError);
}

TEST(Versions, Extract) {
  EXPECT_EQ(extract_versions("Acme SecureOS 5.1.2"), (std::set<std::string>{"5.1.2"}));
  EXPECT_EQ(extract_versions("Card v2.3 (rev. 1.0), build 7"), (std::set<std::string>{"2.3", "1.0"}));
  EXPECT_EQ(extract_versions("Toolbox 00.03.11.05."), (std::set<std::string>{"00.03.11.05"}));
  EXPECT_TRUE(extract_versions("Junos OS 18.3R1 for SRX").empty());
  EXPECT_TRUE(extract_versions("Windows 10").empty());
  EXPECT_TRUE(extract_versions("").empty());
}

TEST(Versions, Compatible) {
  EXPECT_TRUE(versions_compatible("5.1.2", "5.1"));
  EXPECT_FALSE(versions_compatible("5.1.2", "5.2"));
  EXPECT_TRUE(versions_compatible("5.1", "5.1.7"));
  EXPECT_TRUE(versions_compatible("03.01", "3.1"));
  EXPECT_FALSE(versions_compatible("3.10", "3.1"));
  EXPECT_FALSE(versions_compatible("7.2", "*"));
  EXPECT_TRUE(versions_compatible("7.2", "*", true));
  EXPECT_TRUE(versions_compatible("7.2", "-", true));
  EXPECT_TRUE(versions_compatible("00.03.11.05", "00.03.11.05"));
  EXPECT_FALSE(versions_compatible("2.0", "v200r005"));
}

TEST(Candidates, FilterTable) {
  const auto cases = cpe_fixtures::candidate_table();
  ASSERT_EQ(cases.size(), 20u);
  for (const auto& c : cases) {
    const NvdData nvd({CpeEntry::parse(c.cpe)}, {});
    MatchOptions options;
    options.allow_wildcard_version = c.allow_wildcard;
    const auto aliases = VendorAliases::parse(c.alias);
    const auto r = record(c.vendor, c.title);
    const auto found = candidate_cpes(r, extract_versions(c.title), nvd, aliases, options);
    EXPECT_EQ(!found.empty(), c.expected) << c.name;
  }
}

TEST(Candidates, NoVersionsNoCandidates) {
  const NvdData nvd({CpeEntry::parse(uri("acme", "firewall", "1.0"))}, {});
  EXPECT_TRUE(candidate_cpes(record("Acme", "Firewall 1.0"), {}, nvd).empty());
}

TEST(Matching, CpeText) {
  EXPECT_EQ(cpe_match_text(CpeEntry::parse(uri("acme", "secure_os", "5.1"))), "acme secure os 5.1");
  EXPECT_EQ(cpe_match_text(CpeEntry::parse(uri("acme", "secure_os", "*"))), "acme secure os");
}

TEST(Matching, SharedLibraryCve) {
  // One CVE listing sixteen versions of a chip's RSA library.
  std::vector<CpeEntry> cpes;
  std::string listing;
  for (int v = 5; v < 21; ++v) {
    const auto u = uri("infineon", "rsa_library", "1.02." + std::string(v < 10 ? "00" : "0") + std::to_string(v));
    cpes.push_back(CpeEntry::parse(u));
    listing += (listing.empty() ? "" : ",") + u;
  }
  const auto decoy = uri("infineon", "tpm_firmware", "4.32");
  cpes.push_back(CpeEntry::parse(decoy));
  const NvdData nvd(cpes, {parse_cve_line("CVE-2017-15361|2017-10-16|5.9|CWE-310|" + listing),
                           parse_cve_line("CVE-2019-0001|2019-01-01|4.0|CWE-20|" + decoy)});
  ASSERT_EQ(nvd.cves_of_cpe(cpes[0].uri).size(), 1u);

  const auto aliases = VendorAliases::parse("Infineon_Technologies_AG infineon\n");
  const auto r = record("Infineon Technologies AG", "Infineon Security Controller M7892 B11 with RSA Library 1.02.013");
  const auto result = match_record(r, nvd, aliases);
  EXPECT_EQ(result.cves, (std::set<std::string>{"CVE-2017-15361"}));
  ASSERT_FALSE(result.matched_cpes.empty());
  EXPECT_EQ(result.matched_cpes.front().uri, uri("infineon", "rsa_library", "1.02.013"));
  EXPECT_EQ(result.matched_cpes.front().score.exact(), fuzzy::Rational(100));
  for (std::size_t i = 1; i < result.matched_cpes.size(); ++i) {
    EXPECT_GE(result.matched_cpes[i - 1].score, result.matched_cpes[i].score);
  }
}

TEST(Matching, WildcardVersionFlag) {
  const NvdData nvd({CpeEntry::parse(uri("microchip", "atmel_toolbox", "*"))}, {});
  const auto r = record("Microchip", "Microchip AT90SC28880RCFV with Atmel Toolbox 00.03.11.05");
  EXPECT_TRUE(match_record(r, nvd).matched_cpes.empty());
  MatchOptions options;
  options.allow_wildcard_version = true;
  EXPECT_EQ(match_record(r, nvd, {}, options).matched_cpes.size(), 1u);
}

TEST(Matching, AntiMonotoneInThreshold) {
  using Pair = std::pair<std::string, std::string>;
  std::vector<std::pair<ingest::CertRecord, NvdData>> inputs;
  for (const auto& p : cpe_fixtures::labeled_pairs()) {
    inputs.emplace_back(record(p.vendor, p.title), NvdData({CpeEntry::parse(p.cpe)}, {}));
  }
  std::set<Pair> previous;
  bool first = true;
  for (int t : {0, 50, 80, 92, 100}) {
    MatchOptions options;
    options.threshold = fuzzy::Rational(t);
    std::set<Pair> current;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      for (const auto& m : match_record(inputs[i].first, inputs[i].second, {}, options).matched_cpes) {
        current.insert({std::to_string(i), m.uri});
      }
    }
    if (!first) {
      for (const auto& pair : current) EXPECT_TRUE(previous.count(pair)) << "threshold " << t;
    }
    EXPECT_FALSE(current.empty());
    previous = std::move(current);
    first = false;
  }
}

TEST(Matching, LabeledPrecision) {
  const auto pairs = cpe_fixtures::labeled_pairs();
  ASSERT_EQ(pairs.size(), 100u);
  const auto count = cpe_fixtures::labeled_precision(pairs);
  EXPECT_GE(count.predicted, 50u);
  EXPECT_GE(count.precision(), 0.85) << count.correct << "/" << count.predicted;
}

TEST(Matching, MiniCorpusCvesComeFromMatchedCpes) {
  const auto loaded = minicorpus::load(1);
  const auto& s = loaded.snapshot;
  const auto nvd = load_nvd(minicorpus::root() + "/nvd/cpe_dict.txt", minicorpus::root() + "/nvd/cve_feed.txt");
  std::size_t with_cves = 0;
  for (const auto& [key, result] : s.matches.results) {
    std::set<std::string> expected;
    for (const auto& m : result.matched_cpes) {
      EXPECT_GE(m.score.exact(), fuzzy::Rational(92));
      const auto& cves = nvd.cves_of_cpe(m.uri);
      expected.insert(cves.begin(), cves.end());
    }
    EXPECT_EQ(result.cves, expected) << key;
    for (const auto& id : result.cves) EXPECT_TRUE(s.matches.cves.count(id));
    if (!result.cves.empty()) ++with_cves;
  }
  EXPECT_GT(with_cves, 10u);
}
