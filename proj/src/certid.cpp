#include "certlab/certid.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <functional>
#include <set>

#include "regex_util.hpp"

namespace certlab::certid {

namespace {

using Builder = std::function<CertId(const boost::smatch&)>;

struct SchemePattern {
  std::string scheme;
  std::string source;
  Builder build;
};

std::string group(const boost::smatch& m, const char* name) {
  return m[name].matched ? m[name].str() : std::string{};
}

long long to_number(std::string_view digits) {
  long long value = 0;
  std::from_chars(digits.data(), digits.data() + digits.size(), value);
  return value;
}

int expand_year(std::string_view digits) {
  const auto value = static_cast<int>(to_number(digits));
  if (digits.size() >= 4) return value;
  const int yy = value % 100;
  return yy < 90 ? 2000 + yy : 1900 + yy;
}

std::string padded(long long value, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%0*lld", width, value);
  return buf;
}

std::string two_digit_year(int year) { return padded(year % 100, 2); }

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return c >= '0' && c <= '9'; });
}

Counter text_counter(const std::string& raw) {
  if (all_digits(raw)) return to_number(raw);
  return raw;
}

std::string upper_v(std::string version) {
  if (!version.empty() && version.front() == 'v') version.front() = 'V';
  return version;
}

CertId make(std::string scheme, std::string canonical, IdComponents components) {
  return CertId{std::move(scheme), std::move(canonical), std::move(components)};
}

CertId build_fr(const boost::smatch& m) {
  IdComponents c;
  c.year = expand_year(group(m, "year"));
  const auto counter = to_number(group(m, "counter"));
  c.counter = counter;
  std::string canonical = "ANSSI-CC-" + std::to_string(*c.year) + "/" + padded(counter, 2);
  if (auto doc = group(m, "doc"); !doc.empty()) {
    c.doc = doc;
    canonical += "-" + doc;
  }
  if (auto version = group(m, "version"); !version.empty()) {
    c.version = version;
    canonical += "v" + version;
  }
  return make("FR", canonical, c);
}

CertId build_us(const boost::smatch& m, bool two_digit) {
  IdComponents c;
  const auto counter = to_number(group(m, "counter"));
  c.counter = counter;
  std::string canonical = "CCEVS-VR-";
  if (m["cc"].matched) canonical += "CC-";
  if (m["VID"].matched) {
    canonical += "VID";
    c.doc = "VID";
  }
  if (two_digit) {
    c.year = expand_year(group(m, "year"));
    canonical += two_digit_year(*c.year) + "-" + padded(counter, 4);
  } else {
    canonical += padded(counter, 4);
    if (m["year"].matched) {
      c.year = expand_year(group(m, "year"));
      canonical += "-" + std::to_string(*c.year);
    }
  }
  return make("US", canonical, c);
}

const std::vector<SchemePattern>& patterns() {
  static const std::vector<SchemePattern> table = [] {
    std::vector<SchemePattern> t;
    t.push_back({"AU", R"((Certificate Number:|Certification Report) (?P<year>[0-9]{2,4})/(?P<counter>[0-9]+))",
                 [](const boost::smatch& m) {
                   IdComponents c;
                   c.year = expand_year(group(m, "year"));
                   c.counter = to_number(group(m, "counter"));
                   return make("AU",
                               "Certificate Number: " + std::to_string(*c.year) + "/" +
                                   std::to_string(std::get<long long>(c.counter)),
                               c);
                 }});
    t.push_back({"CA", R"((?P<number1>383)[ -](?P<digit>[0-9])[ -](?P<number2>[0-9]+)(-CR|P)?)",
                 [](const boost::smatch& m) {
                   IdComponents c;
                   c.counter = to_number(group(m, "number2"));
                   c.version = group(m, "digit");
                   return make("CA", "383-" + group(m, "digit") + "-" + group(m, "number2"), c);
                 }});
    t.push_back({"CA", R"((?P<number>[0-9]+)[ -](?P<lab>EWA|LSS|CCS)([ -](?P<year>[0-9]+))?)",
                 [](const boost::smatch& m) {
                   IdComponents c;
                   c.counter = to_number(group(m, "number"));
                   c.lab = group(m, "lab");
                   std::string canonical = group(m, "number") + " " + *c.lab;
                   if (m["year"].matched) {
                     c.year = expand_year(group(m, "year"));
                     canonical += " " + group(m, "year");
                   }
                   return make("CA", canonical, c);
                 }});
    t.push_back({"DE",
                 R"(BSI-DSZ-CC-((?P<s>S)-)?(?P<counter>[0-9]{3,5})-?((?P<version>[vV][0-9])-)?(?P<year>[0-9]{4})?(-(?P<doc>(RA|MA)(-[0-9]+)?))?)",
                 [](const boost::smatch& m) {
                   IdComponents c;
                   const auto counter = to_number(group(m, "counter"));
                   c.counter = counter;
                   std::string canonical = "BSI-DSZ-CC-";
                   if (m["s"].matched) canonical += "S-";
                   canonical += padded(counter, 4);
                   if (m["year"].matched) {
                     if (m["version"].matched) {
                       c.version = upper_v(group(m, "version"));
                       canonical += "-" + *c.version;
                     }
                     c.year = expand_year(group(m, "year"));
                     canonical += "-" + std::to_string(*c.year);
                   }
                   if (m["doc"].matched) {
                     c.doc = group(m, "doc");
                     canonical += "-" + *c.doc;
                   }
                   return make("DE", canonical, c);
                 }});
    t.push_back({"ES",
                 R"((?P<year>[0-9]{4})[-‐](?P<project>[0-9]+)[-‐]INF[-‐](?P<counter>[0-9]+)[ -‐]{1,2}[vV](?P<version>[0-9]))",
                 [](const boost::smatch& m) {
                   IdComponents c;
                   c.year = expand_year(group(m, "year"));
                   c.counter = to_number(group(m, "counter"));
                   c.version = "v" + group(m, "version");
                   c.doc = std::to_string(to_number(group(m, "project")));
                   return make("ES",
                               std::to_string(*c.year) + "-" + *c.doc + "-INF-" +
                                   std::to_string(std::get<long long>(c.counter)) + "-" + *c.version,
                               c);
                 }});
    t.push_back({"FR", R"(DCSS[Ii]-(?P<year>[0-9]{2,4})/(?P<counter>[0-9]+)([vV](?P<version>[0-9]))?)", build_fr});
    t.push_back({"FR", R"(Rapport de certification (?P<year>[0-9]{2,4})/(?P<counter>[0-9]+)([vV](?P<version>[0-9]))?)",
                 build_fr});
    t.push_back({"FR", R"(Certification Report (?P<year>[0-9]{2,4})/(?P<counter>[0-9]+)([vV](?P<version>[0-9]))?)",
                 build_fr});
    t.push_back({"FR",
                 R"(ANSS[Ii](-CC)?[ -](?P<year>[0-9]{2,4})[/_-](?P<counter>[0-9]+)(-(?P<doc>([MSR][0-9]+)))?([vV](?P<version>[0-9]))?)",
                 build_fr});
    t.push_back({"IN",
                 R"(IC3S/(?P<lab>[A-Z]+[0-9]+)/(?P<vendor>[a-zA-Z_]+)/(?P<level>[a-zA-Z0-9]+)/(?P<number1>[0-9]+)/(?P<number2>[0-9]+) ?(/CR)?)",
                 [](const boost::smatch& m) {
                   IdComponents c;
                   c.lab = group(m, "lab");
                   c.counter = group(m, "number1") + "/" + group(m, "number2");
                   return make("IN",
                               "IC3S/" + *c.lab + "/" + group(m, "vendor") + "/" + group(m, "level") + "/" +
                                   std::get<std::string>(c.counter),
                               c);
                 }});
    t.push_back({"IT", R"(OCSI/CERT/((?P<lab>[A-Z]{3})/)?(?P<counter>[0-9]{2,3})/(?P<year>[0-9]{4})/RC)",
                 [](const boost::smatch& m) {
                   IdComponents c;
                   const auto counter = to_number(group(m, "counter"));
                   c.counter = counter;
                   c.year = expand_year(group(m, "year"));
                   std::string canonical = "OCSI/CERT/";
                   if (m["lab"].matched) {
                     c.lab = group(m, "lab");
                     canonical += *c.lab + "/";
                   }
                   canonical += padded(counter, 2) + "/" + std::to_string(*c.year) + "/RC";
                   return make("IT", canonical, c);
                 }});
    t.push_back({"JP", R"((CRP|ACR)-C(?P<counter>[0-9]+)-(?P<digit>[0-9]+))", [](const boost::smatch& m) {
                   IdComponents c;
                   const auto counter = to_number(group(m, "counter"));
                   c.counter = counter;
                   c.version = padded(to_number(group(m, "digit")), 2);
                   return make("JP", m[1].str() + "-C" + padded(counter, 4) + "-" + *c.version, c);
                 }});
    t.push_back({"JP", R"(JISEC-CC-CRP-C(?P<counter>[0-9]+)-(?P<digit>[0-9]+)-(?P<year>[0-9]{4}))",
                 [](const boost::smatch& m) {
                   IdComponents c;
                   const auto counter = to_number(group(m, "counter"));
                   c.counter = counter;
                   c.version = padded(to_number(group(m, "digit")), 2);
                   c.year = expand_year(group(m, "year"));
                   return make("JP",
                               "JISEC-CC-CRP-C" + padded(counter, 4) + "-" + *c.version + "-" +
                                   std::to_string(*c.year),
                               c);
                 }});
    t.push_back({"JP", R"(Certification No. [cC](?P<counter>[0-9]+))", [](const boost::smatch& m) {
                   IdComponents c;
                   const auto counter = to_number(group(m, "counter"));
                   c.counter = counter;
                   return make("JP", "Certification No. C" + padded(counter, 4), c);
                 }});
    t.push_back({"KR", R"(KECS[-‐](?P<word>ISIS|NISS|CISS)[-‐](?P<counter>[0-9]{2,4})[-‐](?P<year>[0-9]{4}))",
                 [](const boost::smatch& m) {
                   IdComponents c;
                   const auto counter = to_number(group(m, "counter"));
                   c.counter = counter;
                   c.year = expand_year(group(m, "year"));
                   c.lab = group(m, "word");
                   return make("KR",
                               "KECS-" + *c.lab + "-" + padded(counter, 4) + "-" + std::to_string(*c.year), c);
                 }});
    t.push_back({"MY",
                 R"(ISCB-(?P<digit>[0-9])-RPT-C(?P<counter>[0-9]{3})-CR(-[0-9])?-(?P<version>[vV][0-9][a-z]?))",
                 [](const boost::smatch& m) {
                   IdComponents c;
                   const auto counter = to_number(group(m, "counter"));
                   c.counter = counter;
                   c.version = upper_v(group(m, "version"));
                   return make("MY",
                               "ISCB-" + group(m, "digit") + "-RPT-C" + padded(counter, 3) + "-CR" + m[3].str() +
                                   "-" + *c.version,
                               c);
                 }});
    t.push_back({"NL",
                 R"((NSCIB-|CC-|NSCIB-CC-)(?P<core>((?P<year>[0-9]{2})-)?(-?[0-9]+)+)(-?(?P<doc>(CR|MA|MR)[0-9]*))?)",
                 [](const boost::smatch& m) {
                   IdComponents c;
                   const auto core = group(m, "core");
                   const auto last_dash = core.find_last_of('-');
                   c.counter = to_number(last_dash == std::string::npos ? core : core.substr(last_dash + 1));
                   if (m["year"].matched) c.year = expand_year(group(m, "year"));
                   std::string canonical = "NSCIB-CC-" + core;
                   if (m["doc"].matched) {
                     c.doc = group(m, "doc");
                     canonical += "-" + *c.doc;
                   }
                   return make("NL", canonical, c);
                 }});
    t.push_back({"NO", R"(SERTIT-(?P<counter>[0-9]+))", [](const boost::smatch& m) {
                   IdComponents c;
                   const auto counter = to_number(group(m, "counter"));
                   c.counter = counter;
                   return make("NO", "SERTIT-" + padded(counter, 3), c);
                 }});
    t.push_back({"SE", R"(CSEC ?(?P<year>[0-9]{4})(?P<counter>[0-9]{2,3}))", [](const boost::smatch& m) {
                   IdComponents c;
                   const auto counter = to_number(group(m, "counter"));
                   c.counter = counter;
                   c.year = expand_year(group(m, "year"));
                   return make("SE", "CSEC" + std::to_string(*c.year) + padded(counter, 3), c);
                 }});
    t.push_back({"SG", R"(CSA_CC_(?P<year>[0-9]{2})(?P<counter>[0-9]{3}))", [](const boost::smatch& m) {
                   IdComponents c;
                   const auto counter = to_number(group(m, "counter"));
                   c.counter = counter;
                   c.year = expand_year(group(m, "year"));
                   return make("SG", "CSA_CC_" + two_digit_year(*c.year) + padded(counter, 3), c);
                 }});
    t.push_back({"TR", R"((?P<prefix>[0-9\\.]+)/TSE-CCCS-(?P<number>[0-9]+))", [](const boost::smatch& m) {
                   IdComponents c;
                   c.counter = to_number(group(m, "number"));
                   c.doc = group(m, "prefix");
                   return make("TR", *c.doc + "/TSE-CCCS-" + std::to_string(std::get<long long>(c.counter)), c);
                 }});
    t.push_back({"UK", R"(CRP(?P<counter>[0-9]+[A-Z]?))", [](const boost::smatch& m) {
                   IdComponents c;
                   c.counter = text_counter(group(m, "counter"));
                   return make("UK", "CRP" + group(m, "counter"), c);
                 }});
    t.push_back({"UK", R"(CERTIFICATION REPORT No. P(?P<counter>[0-9]+[A-Z]?))", [](const boost::smatch& m) {
                   IdComponents c;
                   c.counter = text_counter(group(m, "counter"));
                   c.doc = "P";
                   return make("UK", "CERTIFICATION REPORT No. P" + group(m, "counter"), c);
                 }});
    t.push_back({"US",
                 R"(CCEVS-VR-((?P<cc>CC)-)?((?P<VID>VID)-?)?(?P<year>[0-9]{2})-(?P<counter>[0-9]+))",
                 [](const boost::smatch& m) { return build_us(m, true); }});
    t.push_back({"US",
                 R"(CCEVS-VR-((?P<cc>CC)-)?((?P<VID>VID)-?)?(?P<counter>[0-9]{4,5})(-(?P<year>[0-9]{4}))?)",
                 [](const boost::smatch& m) { return build_us(m, false); }});
    return t;
  }();
  return table;
}

const std::vector<boost::regex>& compiled() {
  static const std::vector<boost::regex> regexes = [] {
    std::vector<boost::regex> out;
    for (const auto& p : patterns()) out.push_back(detail::compile_pattern(p.source));
    return out;
  }();
  return regexes;
}

}  // namespace

const std::vector<std::string>& known_schemes() {
  static const std::vector<std::string> schemes = [] {
    std::vector<std::string> out;
    for (const auto& p : patterns()) {
      if (std::find(out.begin(), out.end(), p.scheme) == out.end()) out.push_back(p.scheme);
    }
    return out;
  }();
  return schemes;
}

bool is_known_scheme(std::string_view code) {
  const auto& s = known_schemes();
  return std::find(s.begin(), s.end(), code) != s.end();
}

const std::vector<std::pair<std::string, std::string>>& scheme_patterns() {
  static const std::vector<std::pair<std::string, std::string>> out = [] {
    std::vector<std::pair<std::string, std::string>> v;
    for (const auto& p : patterns()) v.emplace_back(p.scheme, p.source);
    return v;
  }();
  return out;
}

std::string_view to_string(IdSource source) {
  switch (source) {
    case IdSource::filename:
      return "filename";
    case IdSource::pdf_metadata:
      return "pdf_metadata";
    case IdSource::frontpage:
      return "frontpage";
    case IdSource::contents:
      return "contents";
  }
  return "unknown";
}

Weight source_multiplier(IdSource source) {
  switch (source) {
    case IdSource::pdf_metadata:
      return Weight(6, 5);
    case IdSource::frontpage:
      return Weight(3, 2);
    case IdSource::filename:
    case IdSource::contents:
      break;
  }
  return Weight(1);
}

std::vector<IdHit> scan_ids(std::string_view text) {
  std::vector<IdHit> hits;
  const auto& table = patterns();
  const auto& regexes = compiled();
  for (std::size_t i = 0; i < table.size(); ++i) {
    boost::cregex_iterator it(text.data(), text.data() + text.size(), regexes[i]);
    for (; it != boost::cregex_iterator{}; ++it) {
      auto raw = collapse_whitespace((*it)[0].str());
      if (raw.empty()) continue;
      hits.push_back({table[i].scheme, std::move(raw), static_cast<std::size_t>(it->position())});
    }
  }
  std::stable_sort(hits.begin(), hits.end(), [](const IdHit& a, const IdHit& b) { return a.offset < b.offset; });
  return hits;
}

std::optional<CertId> try_canonicalize(std::string_view raw_view, std::string_view scheme) {
  const std::string raw(raw_view);
  const auto& table = patterns();
  const auto& regexes = compiled();
  boost::smatch m;
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (table[i].scheme == scheme && boost::regex_match(raw, m, regexes[i])) return table[i].build(m);
  }
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (table[i].scheme == scheme && boost::regex_search(raw, m, regexes[i])) return table[i].build(m);
  }
  return std::nullopt;
}

CertId canonicalize(std::string_view raw, std::string_view scheme) {
  if (auto id = try_canonicalize(raw, scheme)) return *id;
  throw NotAnId("'" + std::string(raw) + "' is not a certificate ID of scheme " + std::string(scheme));
}

std::vector<IdCandidate> candidates_from_counts(
    const std::map<IdSource, std::map<std::string, std::size_t>>& counts_by_source, std::string_view scheme) {
  std::vector<IdCandidate> out;
  if (!is_known_scheme(scheme)) return out;
  for (const auto& [source, counts] : counts_by_source) {
    std::size_t total = 0;
    for (const auto& [raw, n] : counts) total += n;
    if (total == 0) continue;

    std::map<std::string, std::pair<std::string, std::size_t>> per_canonical;
    for (const auto& [raw, n] : counts) {
      if (n == 0) continue;
      auto id = try_canonicalize(raw, scheme);
      if (!id) continue;
      auto [it, inserted] = per_canonical.try_emplace(id->canonical, raw, 0);
      it->second.second += n;
    }
    for (auto& [canonical, entry] : per_canonical) {
      out.push_back(IdCandidate{entry.first, canonical, source,
                                Weight(static_cast<long long>(entry.second), static_cast<long long>(total))});
    }
  }
  return out;
}

std::vector<IdCandidate> find_candidates(const std::map<IdSource, std::string>& text_by_source,
                                         std::string_view scheme) {
  std::map<IdSource, std::map<std::string, std::size_t>> counts;
  for (const auto& [source, text] : text_by_source) {
    auto& per_source = counts[source];
    for (const auto& hit : scan_ids(text)) ++per_source[hit.raw];
  }
  return candidates_from_counts(counts, scheme);
}

std::map<std::string, Weight> merged_weights(const std::vector<IdCandidate>& candidates) {
  std::map<std::string, Weight> totals;
  for (const auto& c : candidates) totals[c.canonical] += c.weight * source_multiplier(c.source);
  return totals;
}

std::optional<CertId> assign_id(const std::vector<IdCandidate>& candidates, std::string_view scheme) {
  const auto totals = merged_weights(candidates);
  const std::pair<const std::string, Weight>* best = nullptr;
  for (const auto& entry : totals) {
    if (best == nullptr) {
      best = &entry;
      continue;
    }
    if (entry.second != best->second) {
      if (entry.second > best->second) best = &entry;
      continue;
    }
    // Equal weight: longer wins; map order already yields the lexicographically smaller first.
    if (entry.first.size() > best->first.size()) best = &entry;
  }
  if (best == nullptr) return std::nullopt;
  return canonicalize(best->first, scheme);
}

std::string front_page(std::string_view report_text) {
  if (auto ff = report_text.find('\f'); ff != std::string_view::npos) return std::string(report_text.substr(0, ff));
  std::size_t pos = 0;
  for (int line = 0; line < 60 && pos < report_text.size(); ++line) {
    auto nl = report_text.find('\n', pos);
    if (nl == std::string_view::npos) return std::string(report_text);
    pos = nl + 1;
  }
  return std::string(report_text.substr(0, pos));
}

}  // namespace certlab::certid
