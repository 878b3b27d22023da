#include "certlab/vulnmap.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>

namespace certlab::vulnmap {

namespace {

// Splits on `sep` unless escaped with a backslash.
std::vector<std::string> split_escaped(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::string current;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '\\' && i + 1 < text.size()) {
      current.push_back(text[i]);
      current.push_back(text[++i]);
    } else if (text[i] == sep) {
      out.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(text[i]);
    }
  }
  out.push_back(std::move(current));
  return out;
}

std::string unescape(std::string_view field) {
  std::string out;
  for (std::size_t i = 0; i < field.size(); ++i) {
    if (field[i] == '\\' && i + 1 < field.size()) ++i;
    out.push_back(field[i]);
  }
  return out;
}

bool is_number(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

std::vector<std::string> split_plain(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::string current;
  for (char c : text) {
    if (c == sep) {
      out.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  out.push_back(std::move(current));
  return out;
}

}  // namespace

CpeEntry CpeEntry::parse(std::string_view uri) {
  const auto trimmed = trim(uri);
  constexpr std::string_view prefix = "cpe:2.3:";
  if (trimmed.rfind(prefix, 0) != 0) throw SchemaError("not a CPE 2.3 string: '" + trimmed + "'");
  auto fields = split_escaped(std::string_view(trimmed).substr(prefix.size()), ':');
  if (fields.size() != 11) {
    throw SchemaError("CPE must have 11 attribute fields, got " + std::to_string(fields.size()) + ": " + trimmed);
  }
  CpeEntry cpe;
  cpe.uri = trimmed;
  cpe.part = fields[0];
  cpe.vendor = fields[1];
  cpe.product = fields[2];
  cpe.version = fields[3];
  cpe.rest.assign(fields.begin() + 4, fields.end());
  if (cpe.vendor.empty() || cpe.product.empty()) throw SchemaError("CPE with empty vendor or product: " + trimmed);
  return cpe;
}

std::string CpeEntry::serialize() const {
  std::string out = "cpe:2.3:" + part + ":" + vendor + ":" + product + ":" + version;
  for (const auto& f : rest) out += ":" + f;
  return out;
}

CveEntry parse_cve_line(std::string_view line) {
  const auto fields = split_plain(trim(line), '|');
  if (fields.size() != 5) throw SchemaError("CVE record needs 5 '|'-separated fields: " + std::string(line));
  CveEntry cve;
  cve.id = trim(fields[0]);
  if (cve.id.rfind("CVE-", 0) != 0 || cve.id.size() < 13 || !is_number(cve.id.substr(4, 4)) || cve.id[8] != '-' ||
      !is_number(cve.id.substr(9))) {
    throw SchemaError("malformed CVE id: " + cve.id);
  }
  cve.published = parse_date(trim(fields[1]));
  const auto score_text = trim(fields[2]);
  auto [ptr, ec] = std::from_chars(score_text.data(), score_text.data() + score_text.size(), cve.base_score);
  if (ec != std::errc{} || ptr != score_text.data() + score_text.size() || cve.base_score < 0.0 ||
      cve.base_score > 10.0) {
    throw SchemaError("base score must be a number in [0, 10]: " + score_text);
  }
  for (const auto& cwe : split_plain(fields[3], ',')) {
    if (auto t = trim(cwe); !t.empty()) cve.cwe_ids.insert(t);
  }
  for (const auto& uri : split_escaped(fields[4], ',')) {
    if (auto t = trim(uri); !t.empty()) cve.vulnerable_cpes.insert(CpeEntry::parse(t).uri);
  }
  return cve;
}

NvdData::NvdData(std::vector<CpeEntry> cpes, std::vector<CveEntry> cves)
    : cpes_(std::move(cpes)), cves_(std::move(cves)) {
  for (std::size_t i = 0; i < cpes_.size(); ++i) by_vendor_[normalize_vendor(unescape(cpes_[i].vendor))].push_back(i);
  for (std::size_t i = 0; i < cves_.size(); ++i) {
    cve_index_[cves_[i].id] = i;
    for (const auto& uri : cves_[i].vulnerable_cpes) cpe_to_cves_[uri].insert(cves_[i].id);
  }
}

const CveEntry* NvdData::cve(const std::string& id) const {
  auto it = cve_index_.find(id);
  return it == cve_index_.end() ? nullptr : &cves_[it->second];
}

const std::vector<std::size_t>& NvdData::cpes_of_vendor(const std::string& vendor) const {
  static const std::vector<std::size_t> none;
  auto it = by_vendor_.find(vendor);
  return it == by_vendor_.end() ? none : it->second;
}

const std::set<std::string>& NvdData::cves_of_cpe(const std::string& uri) const {
  static const std::set<std::string> none;
  auto it = cpe_to_cves_.find(uri);
  return it == cpe_to_cves_.end() ? none : it->second;
}

NvdData parse_nvd(std::string_view cpe_dict_text, std::string_view cve_feed_text) {
  std::vector<CpeEntry> cpes;
  std::vector<CveEntry> cves;
  auto for_lines = [](std::string_view text, const char* what, auto&& fn) {
    std::istringstream in{std::string(text)};
    std::size_t line_no = 0;
    for (std::string line; std::getline(in, line);) {
      ++line_no;
      const auto t = trim(line);
      if (t.empty() || t.front() == '#') continue;
      try {
        fn(t);
      } catch (const SchemaError& e) {
        throw SchemaError(std::string(what) + " line " + std::to_string(line_no) + ": " + e.what());
      }
    }
  };
  std::set<std::string> seen_cpes;
  for_lines(cpe_dict_text, "CPE dictionary", [&](const std::string& t) {
    auto cpe = CpeEntry::parse(t);
    if (seen_cpes.insert(cpe.uri).second) cpes.push_back(std::move(cpe));
  });
  for_lines(cve_feed_text, "CVE feed", [&](const std::string& t) { cves.push_back(parse_cve_line(t)); });
  return NvdData(std::move(cpes), std::move(cves));
}

NvdData load_nvd(const std::string& cpe_dict_path, const std::string& cve_feed_path) {
  return parse_nvd(read_file(cpe_dict_path), read_file(cve_feed_path));
}

std::string normalize_vendor(std::string_view vendor) {
  std::string cleaned;
  for (unsigned char c : vendor) {
    if (std::isalnum(c)) {
      cleaned.push_back(static_cast<char>(std::tolower(c)));
    } else if (std::isspace(c) || c == '_') {
      cleaned.push_back(' ');
    }
  }
  auto tokens = split_whitespace(cleaned);
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out.push_back('_');
    out += t;
  }
  return out;
}

VendorAliases VendorAliases::parse(std::string_view text) {
  VendorAliases aliases;
  std::istringstream in{std::string(text)};
  for (std::string line; std::getline(in, line);) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto parts = split_whitespace(line);
    if (parts.empty()) continue;
    if (parts.size() != 2) throw SchemaError("alias line needs 'vendor cpe_vendor': " + line);
    aliases.add(parts[0], parts[1]);
  }
  return aliases;
}

void VendorAliases::add(std::string_view vendor, std::string_view cpe_vendor) {
  table_[normalize_vendor(vendor)].insert(normalize_vendor(cpe_vendor));
}

std::set<std::string> VendorAliases::cpe_vendors_for(std::string_view vendor) const {
  const auto norm = normalize_vendor(vendor);
  std::set<std::string> out{norm};
  if (auto it = table_.find(norm); it != table_.end()) out.insert(it->second.begin(), it->second.end());
  return out;
}

std::set<std::string> extract_versions(std::string_view title) {
  std::set<std::string> versions;
  std::string spaced;
  for (char c : title) spaced.push_back(std::string_view("/,;()[]").find(c) == std::string_view::npos ? c : ' ');
  for (auto token : split_whitespace(spaced)) {
    while (!token.empty() && (token.back() == '.' || token.back() == ':')) token.pop_back();
    if (!token.empty() && (token.front() == 'v' || token.front() == 'V')) token.erase(0, 1);
    const auto parts = split_plain(token, '.');
    if (parts.size() < 2) continue;
    if (std::all_of(parts.begin(), parts.end(), [](const std::string& p) { return is_number(p); })) {
      versions.insert(token);
    }
  }
  return versions;
}

bool versions_compatible(std::string_view cert_version, std::string_view cpe_version, bool allow_wildcard_version) {
  if (cpe_version == "-" || cpe_version == "*" || cpe_version.empty()) return allow_wildcard_version;
  const auto cert = split_plain(unescape(cert_version), '.');
  const auto cpe = split_plain(unescape(cpe_version), '.');
  const std::size_t compared = std::min<std::size_t>(2, cpe.size());
  if (cert.size() < compared) return false;
  for (std::size_t i = 0; i < compared; ++i) {
    if (is_number(cert[i]) && is_number(cpe[i])) {
      const auto strip = [](const std::string& s) {
        auto nz = s.find_first_not_of('0');
        return nz == std::string::npos ? std::string("0") : s.substr(nz);
      };
      if (strip(cert[i]) != strip(cpe[i])) return false;
    } else if (cert[i] != cpe[i]) {
      return false;
    }
  }
  return true;
}

std::vector<CpeEntry> candidate_cpes(const ingest::CertRecord& record, const std::set<std::string>& versions,
                                     const NvdData& nvd, const VendorAliases& aliases, const MatchOptions& options) {
  std::vector<CpeEntry> out;
  if (versions.empty()) return out;
  for (const auto& vendor : aliases.cpe_vendors_for(record.vendor)) {
    for (auto idx : nvd.cpes_of_vendor(vendor)) {
      const auto& cpe = nvd.cpes()[idx];
      if (unescape(cpe.product).size() < options.min_product_length) continue;
      const bool version_ok = std::any_of(versions.begin(), versions.end(), [&](const std::string& v) {
        return versions_compatible(v, cpe.version, options.allow_wildcard_version);
      });
      if (version_ok) out.push_back(cpe);
    }
  }
  std::sort(out.begin(), out.end(), [](const CpeEntry& a, const CpeEntry& b) { return a.uri < b.uri; });
  return out;
}

std::string cpe_match_text(const CpeEntry& cpe) {
  std::string text = unescape(cpe.vendor) + " " + unescape(cpe.product);
  if (cpe.version != "-" && cpe.version != "*") text += " " + unescape(cpe.version);
  std::replace(text.begin(), text.end(), '_', ' ');
  return text;
}

fuzzy::SimilarityScore score_candidate(const ingest::CertRecord& record, const CpeEntry& cpe) {
  const auto title = fuzzy::lemmatize_title(record.title);
  const auto target = fuzzy::lemmatize_title(cpe_match_text(cpe));
  return fuzzy::combined_similarity(title.joined, target.joined);
}

MatchResult match_certificate(const ingest::CertRecord& record, const std::vector<CpeEntry>& candidates,
                              const NvdData& nvd, fuzzy::Rational threshold) {
  MatchResult result;
  result.record_key = record.record_key;
  result.threshold_used = threshold;
  for (const auto& cpe : candidates) {
    auto score = score_candidate(record, cpe);
    if (score.exact() < threshold) continue;
    result.matched_cpes.push_back({cpe.uri, score});
    const auto& cves = nvd.cves_of_cpe(cpe.uri);
    result.cves.insert(cves.begin(), cves.end());
  }
  std::sort(result.matched_cpes.begin(), result.matched_cpes.end(), [](const CpeMatch& a, const CpeMatch& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.uri < b.uri;
  });
  return result;
}

MatchResult match_record(const ingest::CertRecord& record, const NvdData& nvd, const VendorAliases& aliases,
                         const MatchOptions& options) {
  const auto versions = extract_versions(record.title);
  return match_certificate(record, candidate_cpes(record, versions, nvd, aliases, options), nvd, options.threshold);
}

}  // namespace certlab::vulnmap
