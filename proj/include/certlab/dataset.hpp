#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "certlab/certid.hpp"
#include "certlab/fuzzymatch.hpp"
#include "certlab/ingest.hpp"
#include "certlab/refgraph.hpp"
#include "certlab/rules.hpp"
#include "certlab/vulnmap.hpp"

namespace certlab {

/// record_key -> per-document keyword hits
using FeatureMap = std::map<std::string, rules::FeatureHits>;

struct IdAssignment {
  certid::CertId id;
  std::size_t candidates_considered = 0;
};

/// record_key -> assigned ID; unassigned records are absent.
using IdMap = std::map<std::string, IdAssignment>;

/// Output of CPE matching, self-contained so analyses need no NVD files.
struct MatchSet {
  fuzzy::Rational threshold{92};
  std::map<std::string, vulnmap::MatchResult> results;
  /// Every CVE referenced by a result.
  std::map<std::string, vulnmap::CveEntry> cves;
};

}  // namespace certlab
