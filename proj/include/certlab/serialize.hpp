#pragma once

#include <json.hpp>

#include <string>
#include <vector>

#include "certlab/dataset.hpp"

namespace certlab::json_io {

using nlohmann::json;

/// "n/d", or "n" for integers.
std::string rational_text(const fuzzy::Rational& value);
fuzzy::Rational parse_rational(std::string_view text);

/// Rounds to 6 decimals so emitted reals are stable text.
double round6(double value);

json to_json(const ingest::CertRecord& record);
ingest::CertRecord record_from_json(const json& j);
json records_to_json(const std::vector<ingest::CertRecord>& records);
std::vector<ingest::CertRecord> records_from_json(const json& j);

json features_to_json(const FeatureMap& features);
FeatureMap features_from_json(const json& j);

json to_json(const certid::CertId& id);
certid::CertId cert_id_from_json(const json& j);
/// record_key -> {scheme, canonical, components, candidates_considered}
json ids_to_json(const IdMap& ids);
IdMap ids_from_json(const json& j);

/// {nodes: [...], edges: [{src, dst, provenance}]}
json graph_to_json(const refgraph::ReferenceGraph& graph);
refgraph::ReferenceGraph graph_from_json(const json& j);

json to_json(const vulnmap::CveEntry& cve);
vulnmap::CveEntry cve_from_json(const std::string& id, const json& j);
json to_json(const vulnmap::MatchResult& result);
json matches_to_json(const MatchSet& matches);
MatchSet matches_from_json(const json& j);

/// Pretty-printed with a trailing newline.
std::string dump(const json& j);
/// Parses a file; syntax errors become SchemaError naming the path.
json read_json_file(const std::string& path);

}  // namespace certlab::json_io
