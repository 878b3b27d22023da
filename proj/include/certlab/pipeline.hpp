#pragma once

#include <json.hpp>

#include <string>
#include <vector>

#include "certlab/analytics.hpp"
#include "certlab/dataset.hpp"

// The processing stages behind the command-line tool, one per subcommand.
namespace certlab::pipeline {

/// Reads every registered artifact under `artifacts_root`. Missing files are
/// skipped.
refgraph::ArtifactTexts load_artifact_texts(const std::vector<ingest::CertRecord>& records,
                                            const std::string& artifacts_root);

FeatureMap extract_features(const std::vector<ingest::CertRecord>& records, const refgraph::ArtifactTexts& texts,
                            const rules::RuleSet& rules);

struct IdResult {
  IdMap ids;
  /// One line per canonical ID shared by several records.
  std::vector<std::string> warnings;
};

/// Sources: report file name, PDF metadata, report front page, report
/// contents. With `features`, the contents counts come from the report's
/// cert_id hits instead of a fresh scan.
IdResult assign_ids(const std::vector<ingest::CertRecord>& records, const refgraph::ArtifactTexts& texts,
                    const FeatureMap* features = nullptr);

refgraph::IdIndex id_index(const IdMap& ids);

MatchSet match_all(const std::vector<ingest::CertRecord>& records, const vulnmap::NvdData& nvd,
                   const vulnmap::VendorAliases& aliases, const vulnmap::MatchOptions& options);

struct ReportOptions {
  analytics::CorrelationOptions correlation;
  std::int64_t short_validity_days = 365;
};

/// Smartcard categories left out of correlations by default.
std::set<std::string> default_excluded_categories();

analytics::Dataset make_dataset(const std::vector<ingest::CertRecord>& records, const MatchSet& matches,
                                const FeatureMap* features, Date snapshot_date);

nlohmann::json build_report(const analytics::Dataset& data, const ReportOptions& options, const IdMap& ids,
                            const refgraph::ReferenceGraph& graph);

}  // namespace certlab::pipeline
