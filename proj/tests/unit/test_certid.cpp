#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "certlab/certid.hpp"
#include "certlab/pipeline.hpp"
#include "corpus.hpp"

using namespace certlab;
using namespace certlab::certid;

namespace {

struct TableRow {
  std::string scheme;
  std::string raw;
};

// One published example per scheme.
const std::vector<TableRow> kExamples = {
    {"AU", "Certificate Number: 2008/49"},
    {"CA", "522 EWA 2020"},
    {"DE", "BSI-DSZ-CC-1052-V3-2021"},
    {"ES", "2018-6-INF-2529-v2"},
    {"FR", "ANSSI-CC-2018/57v2"},
    {"IN", "IC3S/KOL01/ADVA/EAL2/0520/0022"},
    {"IT", "OCSI/CERT/TEC/02/2009/RC"},
    {"JP", "JISEC-CC-CRP-C0599-01-2018"},
    {"KR", "KECS-NISS-0612-2015"},
    {"MY", "ISCB-5-RPT-C104-CR-V1a"},
    {"NL", "NSCIB-CC-17-67206-CR2"},
    {"NO", "SERTIT-040"},
    {"SE", "CSEC2016012"},
    {"SG", "CSA_CC_21005"},
    {"TR", "21.0.03/TSE-CCCS-41"},
    {"UK", "CRP225"},
    {"US", "CCEVS-VR-03-0044"},
};

IdCandidate cand(std::string canonical, IdSource source, Weight w) {
  return IdCandidate{canonical, std::move(canonical), source, w};
}

}  // namespace

TEST(Schemes, SeventeenWithTwentyFivePatterns) {
  EXPECT_EQ(known_schemes().size(), 17u);
  EXPECT_EQ(scheme_patterns().size(), 25u);
  EXPECT_FALSE(is_known_scheme("??"));
}

TEST(Canonicalize, PublishedExamplesAreFixedPoints) {
  for (const auto& row : kExamples) {
    const auto id = canonicalize(row.raw, row.scheme);
    EXPECT_EQ(id.scheme, row.scheme);
    EXPECT_EQ(id.canonical, row.raw) << row.scheme;
    EXPECT_EQ(canonicalize(id.canonical, row.scheme), id) << row.scheme;
    const auto hits = scan_ids(row.raw);
    EXPECT_TRUE(std::any_of(hits.begin(), hits.end(), [&](const IdHit& h) { return h.scheme == row.scheme; }))
        << row.scheme;
  }
}

TEST(Canonicalize, Components) {
  auto de = canonicalize("BSI-DSZ-CC-1052-V3-2021", "DE");
  EXPECT_EQ(std::get<long long>(de.components.counter), 1052);
  EXPECT_EQ(de.components.version, "V3");
  EXPECT_EQ(de.components.year, 2021);

  auto se = canonicalize("CSEC 2016012", "SE");
  EXPECT_EQ(se.canonical, "CSEC2016012");
  EXPECT_EQ(se.components.year, 2016);
  EXPECT_EQ(std::get<long long>(se.components.counter), 12);

  auto au = canonicalize("Certificate Number: 2008/49", "AU");
  EXPECT_EQ(au.components.year, 2008);
  EXPECT_EQ(std::get<long long>(au.components.counter), 49);

  auto in = canonicalize("IC3S/KOL01/ADVA/EAL2/0520/0022", "IN");
  EXPECT_EQ(std::get<std::string>(in.components.counter), "0520/0022");
  EXPECT_EQ(in.components.lab, "KOL01");

  auto ca = canonicalize("522 EWA 2020", "CA");
  EXPECT_EQ(ca.components.lab, "EWA");
  EXPECT_EQ(std::get<long long>(ca.components.counter), 522);
}

TEST(Canonicalize, JoinsVariants) {
  EXPECT_EQ(canonicalize("Rapport de certification 2018/57v2", "FR").canonical, "ANSSI-CC-2018/57v2");
  EXPECT_EQ(canonicalize("ANSSI-CC-2018_57", "FR").canonical, "ANSSI-CC-2018/57");
  EXPECT_EQ(canonicalize("ANSSI 2018-57", "FR").canonical, "ANSSI-CC-2018/57");
  EXPECT_EQ(canonicalize("SERTIT-40", "NO").canonical, "SERTIT-040");
  EXPECT_EQ(canonicalize("KECS-NISS-612-2015", "KR").canonical, "KECS-NISS-0612-2015");
  EXPECT_EQ(canonicalize("KECS‐NISS‐0612‐2015", "KR").canonical, "KECS-NISS-0612-2015");
  EXPECT_EQ(canonicalize("BSI-DSZ-CC-1052-v3-2021", "DE").canonical, "BSI-DSZ-CC-1052-V3-2021");
  EXPECT_EQ(canonicalize("CCEVS-VR-03-44", "US").canonical, "CCEVS-VR-03-0044");
}

TEST(Canonicalize, IdempotentOnSyntheticFamilies) {
  for (int f = 0; f < corpus::family_count(); ++f) {
    for (int s = 0; s < 90; s += 7) {
      const auto id = corpus::make_id(f, s);
      for (const auto& v : id.variants) {
        const auto c = canonicalize(v, id.scheme);
        EXPECT_EQ(c.canonical, id.canonical) << v;
        EXPECT_EQ(canonicalize(c.canonical, id.scheme), c);
      }
    }
  }
}

TEST(Canonicalize, RejectsNonIds) {
  EXPECT_THROW(canonicalize("hello world", "DE"), NotAnId);
  EXPECT_THROW(canonicalize("BSI-DSZ-CC-1052-2021", "FR"), NotAnId);
  EXPECT_FALSE(try_canonicalize("anything", "??"));
}

TEST(FindCandidates, FrenchReportWording) {
  auto c = find_candidates({{IdSource::contents, "Rapport de certification 2018/57v2 du produit"}}, "FR");
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].canonical, "ANSSI-CC-2018/57v2");
  EXPECT_EQ(c[0].weight, Weight(1));
}

TEST(FindCandidates, EmptyTexts) {
  EXPECT_TRUE(find_candidates({{IdSource::contents, ""}, {IdSource::frontpage, ""}}, "DE").empty());
  EXPECT_TRUE(find_candidates({}, "DE").empty());
}

TEST(FindCandidates, OtherSchemesFilteredOut) {
  auto c = find_candidates({{IdSource::contents, "ANSSI-CC-2018/57 uses the chip BSI-DSZ-CC-1052-2021."}}, "FR");
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].canonical, "ANSSI-CC-2018/57");
  for (const auto& x : c) EXPECT_GT(x.weight, Weight(0));
}

TEST(FindCandidates, WeightIsShareOfSourceOccurrences) {
  auto c = find_candidates({{IdSource::contents, "SERTIT-040 SERTIT-40 SERTIT-041"}}, "NO");
  std::map<std::string, Weight> w;
  for (const auto& x : c) w[x.canonical] = x.weight;
  EXPECT_EQ(w["SERTIT-040"], Weight(2, 3));
  EXPECT_EQ(w["SERTIT-041"], Weight(1, 3));
}

TEST(AssignId, SingleCandidate) {
  auto id = assign_id({cand("SERTIT-040", IdSource::contents, Weight(1))}, "NO");
  ASSERT_TRUE(id);
  EXPECT_EQ(id->canonical, "SERTIT-040");
  EXPECT_FALSE(assign_id({}, "NO"));
}

TEST(AssignId, WeightedMergeAcrossSources) {
  // A: 1.0 * 1.5 = 1.5 from the front page; B: 1.0 + 1.0 = 2.0.
  const std::vector<IdCandidate> c = {cand("SERTIT-040", IdSource::frontpage, Weight(1)),
                                      cand("SERTIT-041", IdSource::contents, Weight(1)),
                                      cand("SERTIT-041", IdSource::filename, Weight(1))};
  const auto totals = merged_weights(c);
  EXPECT_EQ(totals.at("SERTIT-040"), Weight(3, 2));
  EXPECT_EQ(totals.at("SERTIT-041"), Weight(2));
  EXPECT_EQ(assign_id(c, "NO")->canonical, "SERTIT-041");
  EXPECT_EQ(source_multiplier(IdSource::pdf_metadata), Weight(6, 5));
}

TEST(AssignId, CoverCitationWinsWhenOwnIdIsMissing) {
  // Known limitation: a cover page naming only the platform outweighs a body
  // that mentions the report's own ID less often than the platform's.
  const std::vector<IdCandidate> c = {cand("SERTIT-060", IdSource::frontpage, Weight(1)),
                                      cand("SERTIT-055", IdSource::contents, Weight(2, 5)),
                                      cand("SERTIT-060", IdSource::contents, Weight(3, 5))};
  EXPECT_EQ(assign_id(c, "NO")->canonical, "SERTIT-060");
}

TEST(AssignId, TiesGoToLongestThenSmallest) {
  const std::string shorter = "BSI-DSZ-CC-1052-2021";
  const std::string longer = "BSI-DSZ-CC-1052-V3-2021";
  ASSERT_GT(longer.size(), shorter.size());
  auto id = assign_id({cand(shorter, IdSource::contents, Weight(1, 2)), cand(longer, IdSource::contents, Weight(1, 2))},
                      "DE");
  EXPECT_EQ(id->canonical, longer);
  auto tie = assign_id({cand("SERTIT-041", IdSource::contents, Weight(1, 2)),
                        cand("SERTIT-040", IdSource::contents, Weight(1, 2))},
                       "NO");
  EXPECT_EQ(tie->canonical, "SERTIT-040");
}

TEST(AssignId, PermutationAndScaleInvariant) {
  std::mt19937 rng(11);
  for (int round = 0; round < 200; ++round) {
    std::vector<IdCandidate> c;
    const auto n = rng() % 6 + 1;
    for (std::size_t i = 0; i < n; ++i) {
      c.push_back(cand(corpus::make_id(0, static_cast<int>(rng() % 5)).canonical,
                       kAllIdSources[rng() % 4], Weight(static_cast<long long>(rng() % 5 + 1), 5)));
    }
    const auto base = assign_id(c, "NO");
    std::shuffle(c.begin(), c.end(), rng);
    EXPECT_EQ(assign_id(c, "NO"), base);
    for (auto& x : c) x.weight *= Weight(7, 3);
    EXPECT_EQ(assign_id(c, "NO"), base);
  }
}

TEST(FrontPage, FormFeedOrSixtyLines) {
  EXPECT_EQ(front_page("title\nID\fbody"), "title\nID");
  std::string many;
  for (int i = 0; i < 70; ++i) many += "line" + std::to_string(i) + "\n";
  const auto fp = front_page(many);
  EXPECT_NE(fp.find("line59\n"), std::string::npos);
  EXPECT_EQ(fp.find("line60"), std::string::npos);
}

TEST(LabeledCorpus, PrecisionOfAssignments) {
  const auto docs = corpus::labeled_id_corpus(150, 2024);
  std::vector<ingest::CertRecord> records;
  refgraph::ArtifactTexts texts;
  for (const auto& d : docs) {
    records.push_back(d.record);
    texts[d.record.record_key][DocKind::certificate_report].push_back(d.report_text);
  }
  const auto result = pipeline::assign_ids(records, texts);
  std::size_t correct = 0;
  for (const auto& d : docs) {
    auto it = result.ids.find(d.record.record_key);
    if (it != result.ids.end() && it->second.id.canonical == d.true_canonical) ++correct;
  }
  ASSERT_GT(result.ids.size(), 0u);
  const double precision = static_cast<double>(correct) / static_cast<double>(result.ids.size());
  EXPECT_GE(precision, 0.98) << correct << "/" << result.ids.size();
  EXPECT_GE(result.ids.size(), 140u);
}

TEST(SharedIds, ReportedAsWarnings) {
  ingest::CertRecord a;
  a.record_key = "a";
  a.scheme = "NO";
  a.artifact_paths[DocKind::certificate_report] = "SERTIT-040.txt";
  auto b = a;
  b.record_key = "b";
  const auto result = pipeline::assign_ids({a, b}, {});
  EXPECT_EQ(result.ids.size(), 2u);
  ASSERT_EQ(result.warnings.size(), 1u);
  EXPECT_NE(result.warnings[0].find("SERTIT-040"), std::string::npos);
}
