#pragma once

#include <boost/rational.hpp>

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "certlab/common.hpp"
#include "certlab/ingest.hpp"
#include "certlab/rules.hpp"
#include "certlab/vulnmap.hpp"

namespace certlab::analytics {

using Rational = boost::rational<long long>;

/// Spearman inputs for which rho is undefined (a constant vector, n < 3, or
/// mismatched lengths).
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

struct SarLevel {
  std::string family;  // e.g. "AVA_VAN"
  int level = 1;

  friend auto operator<=>(const SarLevel&, const SarLevel&) = default;
};

/// Parses "AVA_VAN.3"; nullopt for tokens without a level.
std::optional<SarLevel> parse_sar(std::string_view token);

struct EalRank {
  int base = 1;
  bool augmented = false;

  /// base * 2 + augmented
  int rank() const { return base * 2 + (augmented ? 1 : 0); }
  std::string label() const;

  friend bool operator==(const EalRank&, const EalRank&) = default;
};

/// "EAL4+", "EAL 4", "EAL4 augmented"; nullopt when no level is present.
std::optional<EalRank> parse_eal(std::string_view text);

struct SarProfile {
  std::map<std::string, int> levels;  // family -> maximum level seen
  /// Families whose sources disagree on the level.
  std::set<std::string> conflicts;
  std::optional<EalRank> eal;
};

/// Merges SAR tokens from the declared assurance field, the security target
/// and the certification report. The declared EAL wins; otherwise the most
/// frequent EAL hit across both documents (ties to the higher rank).
SarProfile reconstruct_sars(const ingest::CertRecord& record, const rules::GroupHits& st_hits,
                            const rules::GroupHits& cr_hits);

struct SpearmanResult {
  double rho = 0.0;
  /// One-sided p-value for the alternative "negatively correlated".
  double p_value = 1.0;
  /// Set when p_value came from full permutation enumeration.
  std::optional<Rational> exact_p;
};

/// Average ranks (1-based) with ties sharing the mean of their positions.
std::vector<double> average_ranks(const std::vector<double>& values);

/// Exact permutation test for n <= kExactLimit, Student t with n - 2 degrees
/// of freedom otherwise.
SpearmanResult spearman_less(const std::vector<double>& x, const std::vector<double>& y);
inline constexpr std::size_t kExactLimit = 8;

/// One-sided p from the t approximation, regardless of n.
double spearman_t_pvalue(double rho, std::size_t n);

// --- dataset ------------------------------------------------------------------

/// Immutable view of everything the analyses read.
struct Dataset {
  std::vector<ingest::CertRecord> records;
  /// record_key -> match result
  std::map<std::string, vulnmap::MatchResult> matches;
  /// CVE id -> details (vulnerable_cpes may be empty)
  std::map<std::string, vulnmap::CveEntry> cves;
  /// record_key -> reconstructed SARs
  std::map<std::string, SarProfile> sars;
  /// Stands in for the expiry date of certificates without one.
  Date snapshot_date{};
};

/// CVEs of a record with cert_date <= published < expiry (or snapshot date).
std::vector<const vulnmap::CveEntry*> cves_during_validity(const Dataset& data, const ingest::CertRecord& record);

struct CorrelationOptions {
  std::size_t min_support = 100;
  std::size_t min_level_count = 40;
  /// Records in these categories are left out (case-insensitive).
  std::set<std::string> excluded_categories;
  double significance = 0.01;
};

struct CorrelationResult {
  std::string variable;  // SAR family or "EAL"
  std::optional<double> rho_cve_count;
  std::optional<double> p_cve_count;
  std::optional<double> rho_base_score;
  std::optional<double> p_base_score;
  /// Certificates with the variable and at least one CVE during validity.
  std::size_t support = 0;
  /// Certificates with the variable (cve-count correlation sample size).
  std::size_t sample_size = 0;
  std::size_t domain_range = 0;
  bool significant_cve_count = false;
  bool significant_base_score = false;
};

std::vector<CorrelationResult> correlate_all(const Dataset& data, const CorrelationOptions& options = {});

struct TimelineStats {
  Rational frac_before_cert{0};
  Rational frac_after_cert{0};
  Rational frac_during_validity{0};
  std::size_t pair_count = 0;

  struct Offset {
    std::string record_key;
    std::string cve_id;
    std::int64_t days = 0;  // published - cert_date
  };
  std::vector<Offset> offsets;
};

/// Over every (certificate, matched CVE) pair. All fractions are 0 when no
/// pair exists.
TimelineStats timeline_stats(const Dataset& data);

struct CweRow {
  std::string cwe_id;
  std::string name;
  std::size_t cve_count = 0;

  friend bool operator==(const CweRow&, const CweRow&) = default;
};

/// `CWE-N|name` lines.
std::map<std::string, std::string> parse_cwe_names(std::string_view text);
const std::map<std::string, std::string>& bundled_cwe_names();

/// Distinct CVEs per CWE over all matched certificates, most frequent first,
/// ties by CWE number.
std::vector<CweRow> cwe_table(const Dataset& data,
                              const std::map<std::string, std::string>& names = bundled_cwe_names());

struct MaintenanceRow {
  std::string record_key;
  Date update_date;
  /// cert_date <= published < update_date
  std::vector<std::string> cves_in_window;
  /// published < cert_date
  std::vector<std::string> pre_certification_cves;
};

std::vector<MaintenanceRow> maintenance_cve_screen(const Dataset& data);

struct ShortValidityRow {
  std::string record_key;
  std::int64_t validity_days = 0;
  bool has_cve = false;
};

/// Records whose expiry - cert_date is strictly below `max_days`.
std::vector<ShortValidityRow> short_validity_screen(const Dataset& data, std::int64_t max_days = 365);

}  // namespace certlab::analytics
