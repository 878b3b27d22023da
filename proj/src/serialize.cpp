#include "certlab/serialize.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

namespace certlab::json_io {

namespace {

std::string str(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return {};
  if (!j.at(key).is_string()) throw SchemaError(std::string("field '") + key + "' must be a string");
  return j.at(key).get<std::string>();
}

std::optional<std::string> opt_str(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return str(j, key);
}

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw SchemaError(std::string("missing field '") + key + "'");
  return j.at(key);
}

json opt(const std::optional<std::string>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

std::string rational_text(const fuzzy::Rational& value) {
  if (value.denominator() == 1) return std::to_string(value.numerator());
  return std::to_string(value.numerator()) + "/" + std::to_string(value.denominator());
}

fuzzy::Rational parse_rational(std::string_view text) {
  auto parse_int = [&](std::string_view part) {
    long long v = 0;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (ec != std::errc{} || ptr != part.data() + part.size()) {
      throw SchemaError("invalid rational '" + std::string(text) + "'");
    }
    return v;
  };
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) return fuzzy::Rational(parse_int(text));
  const auto den = parse_int(text.substr(slash + 1));
  if (den == 0) throw SchemaError("zero denominator in '" + std::string(text) + "'");
  return fuzzy::Rational(parse_int(text.substr(0, slash)), den);
}

double round6(double value) {
  const double r = std::round(value * 1e6) / 1e6;
  return r == 0.0 ? 0.0 : r;  // no "-0"
}

// --- records -------------------------------------------------------------------

json to_json(const ingest::CertRecord& r) {
  json artifacts = json::object();
  for (const auto& [kind, path] : r.artifact_paths) artifacts[std::string(to_string(kind))] = path;
  json updates = json::array();
  for (const auto& mu : r.maintenance_updates) updates.push_back({{"date", format_date(mu.date)}, {"path", mu.path}});
  return {
      {"record_key", r.record_key},
      {"scheme", r.scheme},
      {"category", r.category},
      {"title", r.title},
      {"vendor", r.vendor},
      {"cert_date", format_date(r.cert_date)},
      {"expiry_date", r.expiry_date ? json(format_date(*r.expiry_date)) : json(nullptr)},
      {"status", std::string(ingest::to_string(r.status))},
      {"eal", opt(r.declared_eal)},
      {"artifacts", artifacts},
      {"maintenance_updates", updates},
      {"pdf_metadata", r.report_pdf_metadata},
  };
}

ingest::CertRecord record_from_json(const json& j) {
  ingest::CertRecord r;
  r.record_key = str(j, "record_key");
  if (r.record_key.empty()) throw SchemaError("record without record_key");
  r.scheme = str(j, "scheme");
  r.category = str(j, "category");
  r.title = str(j, "title");
  r.vendor = str(j, "vendor");
  r.cert_date = parse_date(str(j, "cert_date"));
  r.expiry_date = parse_optional_date(str(j, "expiry_date"));
  r.status = ingest::status_from_string(str(j, "status"));
  r.declared_eal = opt_str(j, "eal");
  if (j.contains("artifacts")) {
    for (const auto& [kind, path] : j.at("artifacts").items()) {
      r.artifact_paths[doc_kind_from_string(kind)] = path.get<std::string>();
    }
  }
  if (j.contains("maintenance_updates")) {
    for (const auto& mu : j.at("maintenance_updates")) {
      r.maintenance_updates.push_back({parse_date(str(mu, "date")), str(mu, "path")});
    }
  }
  r.report_pdf_metadata = str(j, "pdf_metadata");
  return r;
}

json records_to_json(const std::vector<ingest::CertRecord>& records) {
  json out = json::array();
  for (const auto& r : records) out.push_back(to_json(r));
  return out;
}

std::vector<ingest::CertRecord> records_from_json(const json& j) {
  if (!j.is_array()) throw SchemaError("records must be an array");
  std::vector<ingest::CertRecord> out;
  for (const auto& item : j) out.push_back(record_from_json(item));
  return out;
}

// --- features ------------------------------------------------------------------

json features_to_json(const FeatureMap& features) {
  json out = json::object();
  for (const auto& [key, hits] : features) {
    json per_source = json::object();
    for (const auto& [kind, groups] : hits.per_source) per_source[std::string(to_string(kind))] = groups;
    out[key] = per_source;
  }
  return out;
}

FeatureMap features_from_json(const json& j) {
  if (!j.is_object()) throw SchemaError("features must be an object");
  FeatureMap out;
  for (const auto& [key, per_source] : j.items()) {
    auto& hits = out[key];
    for (const auto& [kind, groups] : per_source.items()) {
      hits.per_source[doc_kind_from_string(kind)] = groups.get<rules::GroupHits>();
    }
  }
  return out;
}

// --- ids -------------------------------------------------------------------

json to_json(const certid::CertId& id) {
  const auto& c = id.components;
  json counter = std::holds_alternative<long long>(c.counter) ? json(std::get<long long>(c.counter))
                                                                : json(std::get<std::string>(c.counter));
  return {
      {"scheme", id.scheme},
      {"canonical", id.canonical},
      {"components",
       {{"year", c.year ? json(*c.year) : json(nullptr)},
        {"counter", counter},
        {"version", opt(c.version)},
        {"lab", opt(c.lab)},
        {"doc", opt(c.doc)}}},
  };
}

certid::CertId cert_id_from_json(const json& j) {
  certid::CertId id;
  id.scheme = str(j, "scheme");
  id.canonical = str(j, "canonical");
  const auto& c = field(j, "components");
  if (c.contains("year") && !c.at("year").is_null()) id.components.year = c.at("year").get<int>();
  const auto& counter = field(c, "counter");
  if (counter.is_number_integer()) {
    id.components.counter = counter.get<long long>();
  } else {
    id.components.counter = counter.get<std::string>();
  }
  id.components.version = opt_str(c, "version");
  id.components.lab = opt_str(c, "lab");
  id.components.doc = opt_str(c, "doc");
  return id;
}

json ids_to_json(const IdMap& ids) {
  json out = json::object();
  for (const auto& [key, a] : ids) {
    auto entry = to_json(a.id);
    entry["candidates_considered"] = a.candidates_considered;
    out[key] = entry;
  }
  return out;
}

IdMap ids_from_json(const json& j) {
  if (!j.is_object()) throw SchemaError("ids must be an object");
  IdMap out;
  for (const auto& [key, entry] : j.items()) {
    IdAssignment a;
    a.id = cert_id_from_json(entry);
    if (entry.contains("candidates_considered")) a.candidates_considered = entry.at("candidates_considered");
    out[key] = std::move(a);
  }
  return out;
}

// --- graph -------------------------------------------------------------------

json graph_to_json(const refgraph::ReferenceGraph& graph) {
  json edges = json::array();
  for (const auto& e : graph.edges()) {
    json prov = json::array();
    for (auto kind : e.provenance) prov.push_back(std::string(to_string(kind)));
    edges.push_back({{"src", e.src}, {"dst", e.dst}, {"provenance", prov}});
  }
  return {{"nodes", graph.nodes()}, {"edges", edges}};
}

refgraph::ReferenceGraph graph_from_json(const json& j) {
  std::set<std::string> nodes = field(j, "nodes").get<std::set<std::string>>();
  std::vector<refgraph::Edge> edges;
  for (const auto& e : field(j, "edges")) {
    refgraph::Edge edge{str(e, "src"), str(e, "dst"), {}};
    for (const auto& kind : field(e, "provenance")) edge.provenance.insert(doc_kind_from_string(kind.get<std::string>()));
    edges.push_back(std::move(edge));
  }
  try {
    return refgraph::ReferenceGraph(std::move(nodes), std::move(edges));
  } catch (const Error& e) {
    throw SchemaError(std::string("graph: ") + e.what());
  }
}

// --- matches -------------------------------------------------------------------

json to_json(const vulnmap::CveEntry& cve) {
  return {{"published", format_date(cve.published)}, {"base_score", cve.base_score}, {"cwe_ids", cve.cwe_ids}};
}

vulnmap::CveEntry cve_from_json(const std::string& id, const json& j) {
  vulnmap::CveEntry cve;
  cve.id = id;
  cve.published = parse_date(str(j, "published"));
  cve.base_score = field(j, "base_score").get<double>();
  if (j.contains("cwe_ids")) cve.cwe_ids = j.at("cwe_ids").get<std::set<std::string>>();
  return cve;
}

json to_json(const vulnmap::MatchResult& result) {
  json cpes = json::array();
  for (const auto& m : result.matched_cpes) {
    cpes.push_back({{"uri", m.uri}, {"score", m.score.rounded()}, {"score_exact", rational_text(m.score.exact())}});
  }
  return {{"matched_cpes", cpes}, {"cves", result.cves}, {"threshold_used", rational_text(result.threshold_used)}};
}

json matches_to_json(const MatchSet& matches) {
  json results = json::object();
  for (const auto& [key, r] : matches.results) results[key] = to_json(r);
  json cves = json::object();
  for (const auto& [id, cve] : matches.cves) cves[id] = to_json(cve);
  return {{"threshold", rational_text(matches.threshold)}, {"results", results}, {"cves", cves}};
}

MatchSet matches_from_json(const json& j) {
  MatchSet out;
  out.threshold = parse_rational(str(j, "threshold"));
  for (const auto& [key, r] : field(j, "results").items()) {
    vulnmap::MatchResult result;
    result.record_key = key;
    result.threshold_used = parse_rational(str(r, "threshold_used"));
    for (const auto& m : field(r, "matched_cpes")) {
      result.matched_cpes.push_back({str(m, "uri"), fuzzy::SimilarityScore(parse_rational(str(m, "score_exact")))});
    }
    result.cves = field(r, "cves").get<std::set<std::string>>();
    out.results[key] = std::move(result);
  }
  for (const auto& [id, cve] : field(j, "cves").items()) out.cves[id] = cve_from_json(id, cve);
  for (const auto& [key, r] : out.results) {
    for (const auto& id : r.cves) {
      if (!out.cves.count(id)) throw SchemaError("matches: " + key + " lists " + id + " without CVE details");
    }
  }
  return out;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json read_json_file(const std::string& path) {
  const auto text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw SchemaError(path + ": " + e.what());
  }
}

}  // namespace certlab::json_io
