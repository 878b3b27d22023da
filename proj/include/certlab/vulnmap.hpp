#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "certlab/common.hpp"
#include "certlab/fuzzymatch.hpp"
#include "certlab/ingest.hpp"

namespace certlab::vulnmap {

/// A CPE 2.3 formatted string split into its 11 attribute fields.
struct CpeEntry {
  std::string uri;
  std::string part;
  std::string vendor;
  std::string product;
  std::string version;
  std::vector<std::string> rest;  // update .. other

  static CpeEntry parse(std::string_view uri);
  std::string serialize() const;

  friend bool operator==(const CpeEntry&, const CpeEntry&) = default;
};

struct CveEntry {
  std::string id;
  Date published;
  double base_score = 0.0;
  std::set<std::string> cwe_ids;
  std::set<std::string> vulnerable_cpes;
};

/// Parses one `CVE-id|published-date|base_score|CWE-list|cpe-uri-list` line.
CveEntry parse_cve_line(std::string_view line);

/// Loaded NVD fixtures with the indices used by matching. The CPE -> CVE
/// mapping is taken as ground truth.
class NvdData {
 public:
  NvdData() = default;
  NvdData(std::vector<CpeEntry> cpes, std::vector<CveEntry> cves);

  const std::vector<CpeEntry>& cpes() const { return cpes_; }
  const std::vector<CveEntry>& cves() const { return cves_; }
  const CveEntry* cve(const std::string& id) const;

  /// Indices into cpes() for a (lowercase) CPE vendor.
  const std::vector<std::size_t>& cpes_of_vendor(const std::string& vendor) const;
  /// CVE ids listing the given CPE uri.
  const std::set<std::string>& cves_of_cpe(const std::string& uri) const;
  const std::map<std::string, std::set<std::string>>& cpe_to_cves() const { return cpe_to_cves_; }

 private:
  std::vector<CpeEntry> cpes_;
  std::vector<CveEntry> cves_;
  std::map<std::string, std::size_t> cve_index_;
  std::map<std::string, std::vector<std::size_t>> by_vendor_;
  std::map<std::string, std::set<std::string>> cpe_to_cves_;
};

NvdData parse_nvd(std::string_view cpe_dict_text, std::string_view cve_feed_text);
NvdData load_nvd(const std::string& cpe_dict_path, const std::string& cve_feed_path);

/// Normalized manufacturer name -> accepted CPE vendor strings.
class VendorAliases {
 public:
  VendorAliases() = default;
  /// Lines of `vendor cpe_vendor`; '#' starts a comment.
  static VendorAliases parse(std::string_view text);

  void add(std::string_view vendor, std::string_view cpe_vendor);
  /// The normalized vendor itself plus any aliases.
  std::set<std::string> cpe_vendors_for(std::string_view vendor) const;

 private:
  std::map<std::string, std::set<std::string>> table_;
};

/// Lowercase, punctuation dropped, whitespace runs joined with '_'.
std::string normalize_vendor(std::string_view vendor);

/// Version-shaped tokens (digits separated by dots, optional leading v/V).
std::set<std::string> extract_versions(std::string_view title);

struct MatchOptions {
  fuzzy::Rational threshold{92};
  std::size_t min_product_length = 4;
  bool allow_wildcard_version = false;
};

bool versions_compatible(std::string_view cert_version, std::string_view cpe_version,
                         bool allow_wildcard_version = false);

/// CPEs passing the three candidate conditions: product length, exact vendor
/// and major.minor version agreement.
std::vector<CpeEntry> candidate_cpes(const ingest::CertRecord& record, const std::set<std::string>& versions,
                                     const NvdData& nvd, const VendorAliases& aliases = {},
                                     const MatchOptions& options = {});

struct CpeMatch {
  std::string uri;
  fuzzy::SimilarityScore score;
};

struct MatchResult {
  std::string record_key;
  std::vector<CpeMatch> matched_cpes;
  std::set<std::string> cves;
  fuzzy::Rational threshold_used{92};
};

/// Text a CPE is scored as: vendor, product and version with '_' as spaces.
std::string cpe_match_text(const CpeEntry& cpe);

fuzzy::SimilarityScore score_candidate(const ingest::CertRecord& record, const CpeEntry& cpe);

MatchResult match_certificate(const ingest::CertRecord& record, const std::vector<CpeEntry>& candidates,
                              const NvdData& nvd, fuzzy::Rational threshold);

/// extract_versions + candidate_cpes + match_certificate.
MatchResult match_record(const ingest::CertRecord& record, const NvdData& nvd, const VendorAliases& aliases = {},
                         const MatchOptions& options = {});

}  // namespace certlab::vulnmap
