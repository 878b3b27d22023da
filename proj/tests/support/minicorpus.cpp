#include "minicorpus.hpp"

#include <filesystem>

namespace fs = std::filesystem;
using namespace certlab;

namespace minicorpus {

std::string root() { return std::string(CERTLAB_SOURCE_DIR) + "/data/minicorpus"; }

std::string golden_report_path() { return std::string(CERTLAB_TEST_DATA_DIR) + "/golden_report.json"; }

pipeline::ReportOptions report_options() {
  pipeline::ReportOptions options;
  options.correlation.min_support = 5;
  options.correlation.min_level_count = 3;
  options.correlation.excluded_categories = pipeline::default_excluded_categories();
  return options;
}

Loaded load(int version) {
  const fs::path base(root());
  const fs::path inputs = version == 1 ? base : base / "v2";
  auto ingested = ingest::ingest_snapshot((inputs / "certs.csv").string(), (inputs / "html_records.jsonl").string());
  const auto artifacts = (base / "artifacts").string();
  ingest::register_artifacts(ingested.records, artifacts);

  Loaded out;
  auto& s = out.snapshot;
  s.created = version == 1 ? "2024-06-30T00:00:00Z" : "2024-09-30T00:00:00Z";
  s.artifacts_root = artifacts;
  s.records = std::move(ingested.records);
  out.texts = pipeline::load_artifact_texts(s.records, artifacts);
  s.features = pipeline::extract_features(s.records, out.texts, rules::default_rules());
  s.ids = pipeline::assign_ids(s.records, out.texts, &s.features).ids;
  s.graph = refgraph::build_graph(pipeline::id_index(s.ids), out.texts);

  const auto nvd = vulnmap::load_nvd((inputs / "nvd/cpe_dict.txt").string(), (inputs / "nvd/cve_feed.txt").string());
  const auto aliases = vulnmap::VendorAliases::parse(read_file((inputs / "nvd/vendor_aliases.txt").string()));
  s.matches = pipeline::match_all(s.records, nvd, aliases, {});
  const auto data = pipeline::make_dataset(s.records, s.matches, &s.features, s.snapshot_date());
  s.report = pipeline::build_report(data, report_options(), s.ids, s.graph);
  return out;
}

}  // namespace minicorpus
