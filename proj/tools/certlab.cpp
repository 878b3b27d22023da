// certlab command-line tool: one subcommand per pipeline stage.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "certlab/pipeline.hpp"
#include "certlab/serialize.hpp"
#include "certlab/service.hpp"
#include "certlab/snapshot.hpp"

namespace fs = std::filesystem;
using namespace certlab;
using nlohmann::json;

namespace {

struct Paths {
  std::string csv, html, artifacts_dir, out, snapshot, rules, features, ids, graph, matches, report, nvd_dir, aliases;
  std::string as_of, host = "127.0.0.1";
  std::vector<std::string> snapshots, inputs;
  int port = 8080;
  double threshold = 92;
  bool allow_wildcard = false;
  bool include_smartcards = false;
  std::size_t min_support = 100;
  std::size_t min_level_count = 40;
  std::int64_t short_validity_days = 365;
};

void write_json(const std::string& path, const json& j) {
  if (path.empty() || path == "-") {
    std::cout << json_io::dump(j);
  } else {
    write_file(path, json_io::dump(j));
  }
}

snapshot::Snapshot load(const std::string& path) { return snapshot::load_snapshot(path); }

refgraph::ArtifactTexts texts_of(const std::string& snapshot_path, const snapshot::Snapshot& s) {
  return pipeline::load_artifact_texts(s.records, snapshot::resolve_artifacts_root(snapshot_path, s));
}

int cmd_ingest(const Paths& p) {
  auto result = ingest::ingest_snapshot(p.csv, p.html);
  for (const auto& c : result.conflicts) {
    std::cerr << "conflict " << c.record_key << " " << c.field << ": csv='" << c.csv_value << "' html='"
              << c.html_value << "'\n";
  }
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
  for (const auto& w : ingest::register_artifacts(result.records, p.artifacts_dir)) std::cerr << "warning: " << w << "\n";

  snapshot::Snapshot s;
  s.created = p.as_of.empty() ? snapshot::current_timestamp() : p.as_of;
  s.snapshot_date();
  const auto out_dir = fs::absolute(p.out).parent_path();
  s.artifacts_root = fs::relative(fs::absolute(p.artifacts_dir), out_dir).generic_string();
  s.records = std::move(result.records);
  snapshot::save_snapshot(p.out, s);
  std::cerr << "ingested " << s.records.size() << " records\n";
  return 0;
}

int cmd_extract(const Paths& p) {
  const auto s = load(p.snapshot);
  const auto rules = p.rules.empty() ? rules::default_rules() : rules::load_rules(p.rules);
  write_json(p.out, json_io::features_to_json(pipeline::extract_features(s.records, texts_of(p.snapshot, s), rules)));
  return 0;
}

int cmd_assign_ids(const Paths& p) {
  const auto s = load(p.snapshot);
  std::optional<FeatureMap> features;
  if (!p.features.empty()) features = json_io::features_from_json(json_io::read_json_file(p.features));
  const auto result =
      pipeline::assign_ids(s.records, texts_of(p.snapshot, s), features ? &*features : nullptr);
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
  std::cerr << "assigned " << result.ids.size() << " of " << s.records.size() << " records\n";
  write_json(p.out, json_io::ids_to_json(result.ids));
  return 0;
}

int cmd_build_graph(const Paths& p) {
  const auto s = load(p.snapshot);
  const auto ids = json_io::ids_from_json(json_io::read_json_file(p.ids));
  const auto graph = refgraph::build_graph(pipeline::id_index(ids), texts_of(p.snapshot, s));
  std::cerr << graph.nodes().size() << " nodes, " << graph.edge_count() << " edges\n";
  write_json(p.out, json_io::graph_to_json(graph));
  return 0;
}

int cmd_match_cpe(const Paths& p) {
  const auto s = load(p.snapshot);
  const fs::path dir(p.nvd_dir);
  const auto nvd = vulnmap::load_nvd((dir / "cpe_dict.txt").string(), (dir / "cve_feed.txt").string());
  vulnmap::VendorAliases aliases;
  const auto alias_path = p.aliases.empty() ? dir / "vendor_aliases.txt" : fs::path(p.aliases);
  if (fs::exists(alias_path)) aliases = vulnmap::VendorAliases::parse(read_file(alias_path.string()));
  vulnmap::MatchOptions options;
  options.threshold = json_io::parse_rational(std::to_string(std::llround(p.threshold * 1000)) + "/1000");
  options.allow_wildcard_version = p.allow_wildcard;
  const auto matches = pipeline::match_all(s.records, nvd, aliases, options);
  std::size_t vulnerable = 0;
  for (const auto& [_, r] : matches.results) vulnerable += r.cves.empty() ? 0 : 1;
  std::cerr << vulnerable << " records with CVEs, " << matches.cves.size() << " distinct CVEs\n";
  write_json(p.out, json_io::matches_to_json(matches));
  return 0;
}

int cmd_analyze(const Paths& p) {
  const auto s = load(p.snapshot);
  const auto matches = json_io::matches_from_json(json_io::read_json_file(p.matches));
  const auto ids = json_io::ids_from_json(json_io::read_json_file(p.ids));
  const auto graph = json_io::graph_from_json(json_io::read_json_file(p.graph));
  std::optional<FeatureMap> features;
  if (!p.features.empty()) features = json_io::features_from_json(json_io::read_json_file(p.features));
  const auto data = pipeline::make_dataset(s.records, matches, features ? &*features : nullptr, s.snapshot_date());
  pipeline::ReportOptions options;
  options.correlation.min_support = p.min_support;
  options.correlation.min_level_count = p.min_level_count;
  if (!p.include_smartcards) options.correlation.excluded_categories = pipeline::default_excluded_categories();
  options.short_validity_days = p.short_validity_days;
  write_json(p.out, pipeline::build_report(data, options, ids, graph));
  return 0;
}

int cmd_bundle(const Paths& p) {
  auto s = load(p.snapshot);
  if (!p.features.empty()) s.features = json_io::features_from_json(json_io::read_json_file(p.features));
  if (!p.ids.empty()) s.ids = json_io::ids_from_json(json_io::read_json_file(p.ids));
  if (!p.graph.empty()) s.graph = json_io::graph_from_json(json_io::read_json_file(p.graph));
  if (!p.matches.empty()) s.matches = json_io::matches_from_json(json_io::read_json_file(p.matches));
  if (!p.report.empty()) s.report = json_io::read_json_file(p.report);
  const auto out_dir = fs::absolute(p.out).parent_path();
  const auto root = snapshot::resolve_artifacts_root(p.snapshot, s);
  s.artifacts_root = fs::relative(root, out_dir).generic_string();
  // Round-trip through the reader so inconsistent sections are rejected.
  s = snapshot::snapshot_from_json(snapshot::to_json(s));
  snapshot::save_snapshot(p.out, s);
  return 0;
}

int cmd_diff(const Paths& p) {
  if (p.inputs.size() != 2) throw Error("diff needs exactly two snapshot files");
  const auto events = snapshot::diff(load(p.inputs[0]), load(p.inputs[1]));
  write_json(p.out, snapshot::events_to_json(events));
  std::cerr << events.size() << " events\n";
  return 0;
}

int cmd_serve(const Paths& p) {
  service::SnapshotStore store;
  for (const auto& path : p.snapshots) {
    auto s = load(path);
    const auto texts = texts_of(path, s);
    store.publish(std::move(s), texts);
  }
  service::Server server(store);
  std::cerr << "serving " << store.versions().size() << " snapshot(s) on " << p.host << ":" << p.port << "\n";
  server.run(p.host, p.port);
  return 0;
}

int cmd_check_conversion(const Paths& p) {
  json out = json::array();
  int status = 0;
  for (const auto& path : p.inputs) {
    const auto text = read_file(path);
    const auto q = ingest::check_conversion(text, text.size());
    out.push_back({{"path", path},
                   {"line_count", q.line_count},
                   {"byte_size", q.byte_size},
                   {"avg_line_length", json_io::round6(q.avg_line_length)},
                   {"even_char_nonidentical_lines", q.even_char_nonidentical_lines},
                   {"alnum_ratio", json_io::round6(q.alnum_ratio)},
                   {"malformed", q.malformed},
                   {"failed_checks", q.failed_checks}});
    if (q.malformed) status = 1;
  }
  write_json(p.out, out);
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Common Criteria certification dataset toolkit"};
  app.require_subcommand(1);
  Paths p;

  auto* ingest = app.add_subcommand("ingest", "Unify CSV and HTML-derived metadata into a snapshot");
  ingest->add_option("--csv", p.csv, "CSV snapshot")->required();
  ingest->add_option("--html", p.html, "HTML-derived records (JSON lines)")->required();
  ingest->add_option("--artifacts-dir", p.artifacts_dir, "Directory with artifact text files")->required();
  ingest->add_option("--as-of", p.as_of, "Creation timestamp to record instead of now");
  ingest->add_option("--out", p.out, "Snapshot file to write")->required();

  auto* extract = app.add_subcommand("extract", "Extract keyword features from artifact texts");
  extract->add_option("--rules", p.rules, "Rules file (default: bundled rules)");
  extract->add_option("--snapshot", p.snapshot)->required();
  extract->add_option("--out", p.out)->required();

  auto* assign = app.add_subcommand("assign-ids", "Assign canonical certificate IDs");
  assign->add_option("--snapshot", p.snapshot)->required();
  assign->add_option("--features", p.features, "features.json; its cert_id hits feed the contents source");
  assign->add_option("--out", p.out)->required();

  auto* graph = app.add_subcommand("build-graph", "Build the reference graph");
  graph->add_option("--ids", p.ids)->required();
  graph->add_option("--snapshot", p.snapshot)->required();
  graph->add_option("--out", p.out)->required();

  auto* match = app.add_subcommand("match-cpe", "Map certified products to CPEs and CVEs");
  match->add_option("--snapshot", p.snapshot)->required();
  match->add_option("--nvd-dir", p.nvd_dir, "Directory with cpe_dict.txt and cve_feed.txt")->required();
  match->add_option("--threshold", p.threshold, "Similarity threshold in [0, 100]")
      ->check(CLI::Range(0.0, 100.0))
      ->capture_default_str();
  match->add_option("--aliases", p.aliases, "Vendor alias file (default: <nvd-dir>/vendor_aliases.txt)");
  match->add_flag("--allow-wildcard-version", p.allow_wildcard, "Accept CPE versions '-' and '*'");
  match->add_option("--out", p.out)->required();

  auto* analyze = app.add_subcommand("analyze", "Compute the vulnerability report");
  analyze->add_option("--snapshot", p.snapshot)->required();
  analyze->add_option("--matches", p.matches)->required();
  analyze->add_option("--ids", p.ids)->required();
  analyze->add_option("--graph", p.graph)->required();
  analyze->add_option("--features", p.features, "features.json for SAR reconstruction");
  analyze->add_option("--min-support", p.min_support)->capture_default_str();
  analyze->add_option("--min-level-count", p.min_level_count)->capture_default_str();
  analyze->add_option("--short-validity-days", p.short_validity_days)->capture_default_str();
  analyze->add_flag("--include-smartcards", p.include_smartcards, "Keep smartcard categories in correlations");
  analyze->add_option("--out", p.out)->required();

  auto* bundle = app.add_subcommand("bundle", "Merge stage outputs into one self-contained snapshot");
  bundle->add_option("--snapshot", p.snapshot)->required();
  bundle->add_option("--features", p.features);
  bundle->add_option("--ids", p.ids);
  bundle->add_option("--graph", p.graph);
  bundle->add_option("--matches", p.matches);
  bundle->add_option("--report", p.report);
  bundle->add_option("--out", p.out)->required();

  auto* diff = app.add_subcommand("diff", "List change events between two snapshots");
  diff->add_option("snapshots", p.inputs, "old and new snapshot")->required()->expected(2);
  diff->add_option("--out", p.out);

  auto* serve = app.add_subcommand("serve", "Serve the HTTP JSON API");
  serve->add_option("--snapshot", p.snapshots, "Snapshot file; repeat to load a history, last is current")
      ->required();
  serve->add_option("--host", p.host)->capture_default_str();
  serve->add_option("--port", p.port)->capture_default_str();

  auto* check = app.add_subcommand("check-conversion", "Flag malformed PDF-to-text conversions");
  check->add_option("files", p.inputs)->required();
  check->add_option("--out", p.out);

  CLI11_PARSE(app, argc, argv);

  try {
    if (ingest->parsed()) return cmd_ingest(p);
    if (extract->parsed()) return cmd_extract(p);
    if (assign->parsed()) return cmd_assign_ids(p);
    if (graph->parsed()) return cmd_build_graph(p);
    if (match->parsed()) return cmd_match_cpe(p);
    if (analyze->parsed()) return cmd_analyze(p);
    if (bundle->parsed()) return cmd_bundle(p);
    if (diff->parsed()) return cmd_diff(p);
    if (serve->parsed()) return cmd_serve(p);
    if (check->parsed()) return cmd_check_conversion(p);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
