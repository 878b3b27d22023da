#include "certlab/pipeline.hpp"

#include <filesystem>

#include "certlab/serialize.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace certlab::pipeline {

refgraph::ArtifactTexts load_artifact_texts(const std::vector<ingest::CertRecord>& records,
                                            const std::string& artifacts_root) {
  refgraph::ArtifactTexts texts;
  const fs::path root(artifacts_root);
  auto load = [&](const std::string& key, DocKind kind, const std::string& rel) {
    const auto path = root / rel;
    if (rel.empty() || !fs::is_regular_file(path)) return;
    texts[key][kind].push_back(read_file(path.string()));
  };
  for (const auto& r : records) {
    for (const auto& [kind, rel] : r.artifact_paths) load(r.record_key, kind, rel);
    for (const auto& mu : r.maintenance_updates) load(r.record_key, DocKind::maintenance_update, mu.path);
  }
  return texts;
}

FeatureMap extract_features(const std::vector<ingest::CertRecord>& records, const refgraph::ArtifactTexts& texts,
                            const rules::RuleSet& rules) {
  FeatureMap out;
  for (const auto& r : records) {
    auto& hits = out[r.record_key];
    auto it = texts.find(r.record_key);
    if (it == texts.end()) continue;
    for (const auto& [kind, docs] : it->second) {
      for (const auto& text : docs) hits.merge(kind, rules.extract(text));
    }
  }
  return out;
}

namespace {

const std::string* report_text(const refgraph::ArtifactTexts& texts, const std::string& key) {
  auto it = texts.find(key);
  if (it == texts.end()) return nullptr;
  auto kind = it->second.find(DocKind::certificate_report);
  if (kind == it->second.end() || kind->second.empty()) return nullptr;
  return &kind->second.front();
}

std::map<std::string, std::size_t> scan_counts(std::string_view text) {
  std::map<std::string, std::size_t> counts;
  for (const auto& hit : certid::scan_ids(text)) ++counts[hit.raw];
  return counts;
}

}  // namespace

IdResult assign_ids(const std::vector<ingest::CertRecord>& records, const refgraph::ArtifactTexts& texts,
                    const FeatureMap* features) {
  IdResult result;
  for (const auto& r : records) {
    if (!certid::is_known_scheme(r.scheme)) continue;
    std::map<certid::IdSource, std::map<std::string, std::size_t>> counts;
    if (auto report = r.artifact_paths.find(DocKind::certificate_report); report != r.artifact_paths.end()) {
      counts[certid::IdSource::filename] = scan_counts(fs::path(report->second).filename().string());
    }
    counts[certid::IdSource::pdf_metadata] = scan_counts(r.report_pdf_metadata);
    const auto* text = report_text(texts, r.record_key);
    if (text) counts[certid::IdSource::frontpage] = scan_counts(certid::front_page(*text));

    bool from_features = false;
    if (features) {
      if (auto f = features->find(r.record_key); f != features->end()) {
        auto src = f->second.per_source.find(DocKind::certificate_report);
        if (src != f->second.per_source.end()) {
          if (auto group = src->second.find("cert_id"); group != src->second.end()) {
            counts[certid::IdSource::contents] = group->second;
          }
          from_features = true;
        }
      }
    }
    if (!from_features && text) counts[certid::IdSource::contents] = scan_counts(*text);

    const auto candidates = certid::candidates_from_counts(counts, r.scheme);
    if (auto id = certid::assign_id(candidates, r.scheme)) {
      result.ids[r.record_key] = IdAssignment{*id, certid::merged_weights(candidates).size()};
    }
  }
  for (const auto& [canonical, keys] : id_index(result.ids)) {
    if (keys.size() < 2) continue;
    std::string line = "canonical ID " + canonical + " shared by";
    for (const auto& k : keys) line += " " + k;
    result.warnings.push_back(line);
  }
  return result;
}

refgraph::IdIndex id_index(const IdMap& ids) {
  refgraph::IdIndex index;
  for (const auto& [key, a] : ids) index[a.id.canonical].insert(key);
  return index;
}

MatchSet match_all(const std::vector<ingest::CertRecord>& records, const vulnmap::NvdData& nvd,
                   const vulnmap::VendorAliases& aliases, const vulnmap::MatchOptions& options) {
  MatchSet out;
  out.threshold = options.threshold;
  for (const auto& r : records) {
    auto result = vulnmap::match_record(r, nvd, aliases, options);
    for (const auto& id : result.cves) {
      if (const auto* cve = nvd.cve(id)) out.cves[id] = *cve;
    }
    out.results[r.record_key] = std::move(result);
  }
  return out;
}

std::set<std::string> default_excluded_categories() {
  return {"ICs, Smart Cards and Smart Card-Related Devices and Systems"};
}

analytics::Dataset make_dataset(const std::vector<ingest::CertRecord>& records, const MatchSet& matches,
                                const FeatureMap* features, Date snapshot_date) {
  analytics::Dataset data;
  data.records = records;
  data.matches = matches.results;
  data.cves = matches.cves;
  data.snapshot_date = snapshot_date;
  static const rules::GroupHits none;
  for (const auto& r : records) {
    const rules::GroupHits* st = &none;
    const rules::GroupHits* cr = &none;
    if (features) {
      if (auto f = features->find(r.record_key); f != features->end()) {
        const auto& per = f->second.per_source;
        if (auto it = per.find(DocKind::security_target); it != per.end()) st = &it->second;
        if (auto it = per.find(DocKind::certificate_report); it != per.end()) cr = &it->second;
      }
    }
    data.sars[r.record_key] = analytics::reconstruct_sars(r, *st, *cr);
  }
  return data;
}

namespace {

json fraction(const analytics::Rational& r) {
  return {{"value", json_io::round6(boost::rational_cast<double>(r))}, {"exact", json_io::rational_text(r)}};
}

json opt_real(const std::optional<double>& v) { return v ? json(json_io::round6(*v)) : json(nullptr); }

}  // namespace

json build_report(const analytics::Dataset& data, const ReportOptions& options, const IdMap& ids,
                  const refgraph::ReferenceGraph& graph) {
  const auto& copt = options.correlation;
  json report;
  report["header"] = {
      {"snapshot_date", format_date(data.snapshot_date)},
      {"support_definition",
       "support counts certificates having the variable and at least one matched CVE published during the "
       "certificate's validity period; sample_size counts all certificates having the variable"},
      {"validity_definition", "cert_date <= published < expiry_date, or the snapshot date when no expiry is set"},
      {"min_support", copt.min_support},
      {"min_level_count", copt.min_level_count},
      {"significance", copt.significance},
      {"excluded_categories", copt.excluded_categories},
      {"short_validity_max_days", options.short_validity_days},
  };

  std::set<std::string> distinct_cves;
  std::size_t vulnerable = 0;
  for (const auto& [key, m] : data.matches) {
    if (!m.cves.empty()) ++vulnerable;
    distinct_cves.insert(m.cves.begin(), m.cves.end());
  }
  report["summary"] = {
      {"certificates", data.records.size()},
      {"certificates_with_cves", vulnerable},
      {"distinct_cves", distinct_cves.size()},
      {"assigned_ids", ids.size()},
      {"graph_nodes", graph.nodes().size()},
      {"graph_edges", graph.edge_count()},
  };

  const auto tl = analytics::timeline_stats(data);
  json offsets = json::array();
  for (const auto& o : tl.offsets) offsets.push_back({{"record_key", o.record_key}, {"cve", o.cve_id}, {"days", o.days}});
  report["timeline"] = {
      {"pair_count", tl.pair_count},
      {"frac_before_cert", fraction(tl.frac_before_cert)},
      {"frac_after_cert", fraction(tl.frac_after_cert)},
      {"frac_during_validity", fraction(tl.frac_during_validity)},
      {"offsets_days", offsets},
  };

  json cwe = json::array();
  for (const auto& row : analytics::cwe_table(data)) {
    cwe.push_back({{"cwe_id", row.cwe_id}, {"name", row.name}, {"cve_count", row.cve_count}});
  }
  report["cwe_table"] = cwe;

  json corr = json::array();
  for (const auto& row : analytics::correlate_all(data, copt)) {
    corr.push_back({
        {"variable", row.variable},
        {"rho_cve_count", opt_real(row.rho_cve_count)},
        {"p_cve_count", opt_real(row.p_cve_count)},
        {"rho_base_score", opt_real(row.rho_base_score)},
        {"p_base_score", opt_real(row.p_base_score)},
        {"support", row.support},
        {"sample_size", row.sample_size},
        {"domain_range", row.domain_range},
        {"significant_cve_count", row.significant_cve_count},
        {"significant_base_score", row.significant_base_score},
    });
  }
  report["correlations"] = corr;

  json maint = json::array();
  for (const auto& row : analytics::maintenance_cve_screen(data)) {
    maint.push_back({{"record_key", row.record_key},
                     {"update_date", format_date(row.update_date)},
                     {"cves_in_window", row.cves_in_window},
                     {"pre_certification_cves", row.pre_certification_cves}});
  }
  report["maintenance_screen"] = maint;

  json shortv = json::array();
  for (const auto& row : analytics::short_validity_screen(data, options.short_validity_days)) {
    shortv.push_back(
        {{"record_key", row.record_key}, {"validity_days", row.validity_days}, {"has_cve", row.has_cve}});
  }
  report["short_validity"] = shortv;

  // Certificates referencing vulnerable ones.
  json exposure = json::array();
  std::map<std::string, std::set<std::string>> vulnerable_ids;
  for (const auto& [key, m] : data.matches) {
    auto id = ids.find(key);
    if (m.cves.empty() || id == ids.end() || !graph.contains(id->second.id.canonical)) continue;
    vulnerable_ids[id->second.id.canonical].insert(m.cves.begin(), m.cves.end());
  }
  for (const auto& [canonical, cves] : vulnerable_ids) {
    const auto direct = refgraph::impacted_by(graph, {canonical}, 1);
    const auto all = refgraph::impacted_by(graph, {canonical});
    exposure.push_back({{"canonical_id", canonical},
                        {"cves", cves},
                        {"direct_referencers", direct},
                        {"transitive_referencer_count", all.size()}});
  }
  report["reference_exposure"] = exposure;
  return report;
}

}  // namespace certlab::pipeline
