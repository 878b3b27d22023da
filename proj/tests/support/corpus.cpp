#include "corpus.hpp"

#include <algorithm>
#include <cstdio>

#include "oracles.hpp"

namespace corpus {

namespace {

std::string pad(long long value, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%0*lld", width, value);
  return buf;
}

const std::vector<std::string> kWords = {
    "the",       "product",  "evaluation", "security", "target",    "assurance", "module",  "platform",
    "firmware",  "report",   "component",  "composite", "smartcard", "operating", "system",  "applet",
    "vendor",    "certified", "according", "guidance", "hardware",  "library",   "crypto",  "secure",
    "integrated", "circuit", "based",      "on",        "and",       "with",      "reference", "see"};

template <class T>
const T& pick(std::mt19937& rng, const std::vector<T>& items) {
  return items[std::uniform_int_distribution<std::size_t>(0, items.size() - 1)(rng)];
}

bool chance(std::mt19937& rng, double p) { return std::bernoulli_distribution(p)(rng); }

std::size_t between(std::mt19937& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

/// Appends filler and one mention of `spelling`, delimited on both sides.
void mention(std::mt19937& rng, std::string& text, const std::string& spelling) {
  static const std::vector<std::string> left = {" ", " (", "\n", " see "};
  static const std::vector<std::string> right = {" ", ", ", ")\n", ".\n", "; "};
  text += filler(rng, between(rng, 2, 8));
  text += pick(rng, left) + spelling + pick(rng, right);
}

const std::string& any_variant(std::mt19937& rng, const SyntheticId& id) { return pick(rng, id.variants); }

}  // namespace

int family_count() { return 9; }

SyntheticId make_id(int family, int serial) {
  const long long k = serial;
  switch (family) {
    case 0: {
      const auto c = 10 + k;
      return {"NO", "SERTIT-" + pad(c, 3), {"SERTIT-" + pad(c, 3), "SERTIT-" + std::to_string(c)}};
    }
    case 1: {
      const auto y = 2010 + k % 10, c = 100 + k;
      const auto canonical = "CSEC" + std::to_string(y) + pad(c, 3);
      return {"SE", canonical, {canonical, "CSEC " + std::to_string(y) + pad(c, 3)}};
    }
    case 2: {
      const auto c = 1000 + k, y = 2015 + k % 7;
      const auto canonical = "BSI-DSZ-CC-" + pad(c, 4) + "-" + std::to_string(y);
      return {"DE", canonical, {canonical, "BSI-DSZ-CC-" + pad(c, 5) + "-" + std::to_string(y)}};
    }
    case 3: {
      const auto c = 100 + k, y = 2012 + k % 8;
      const auto canonical = "KECS-NISS-" + pad(c, 4) + "-" + std::to_string(y);
      return {"KR",
              canonical,
              {canonical, "KECS-NISS-" + std::to_string(c) + "-" + std::to_string(y),
               "KECS‐NISS‐" + pad(c, 4) + "‐" + std::to_string(y)}};
    }
    case 4: {
      const auto y = 10 + k % 10, c = 10 + k;
      const auto canonical = "CCEVS-VR-" + pad(y, 2) + "-" + pad(c, 4);
      return {"US", canonical, {canonical, "CCEVS-VR-" + pad(y, 2) + "-" + std::to_string(c)}};
    }
    case 5: {
      const auto y = 2015 + k % 8, c = 10 + k;
      const auto ys = std::to_string(y);
      const auto canonical = "ANSSI-CC-" + ys + "/" + pad(c, 2);
      return {"FR",
              canonical,
              {canonical, "ANSSI-CC-" + ys + "_" + pad(c, 2), "ANSSI-CC-" + ys + "-" + pad(c, 2),
               "Rapport de certification " + ys + "/" + pad(c, 2)}};
    }
    case 6: {
      const auto y = 15 + k % 8, c = 100 + k;
      const auto canonical = "CSA_CC_" + pad(y, 2) + pad(c, 3);
      return {"SG", canonical, {canonical}};
    }
    case 7: {
      const auto c = 10 + k, y = 2005 + k % 10;
      const auto canonical = "OCSI/CERT/TEC/" + pad(c, 2) + "/" + std::to_string(y) + "/RC";
      return {"IT", canonical, {canonical}};
    }
    default: {
      const auto canonical = "CRP" + std::to_string(100 + k);
      return {"UK", canonical, {canonical}};
    }
  }
}

std::string filler(std::mt19937& rng, std::size_t words) {
  std::string out;
  for (std::size_t i = 0; i < words; ++i) out += (i ? " " : "") + pick(rng, kWords);
  return out;
}

GraphCorpus random_graph_corpus(std::mt19937& rng, std::size_t max_certs) {
  GraphCorpus c;
  const auto n = between(rng, 1, max_certs);
  std::vector<std::vector<int>> free_serials(static_cast<std::size_t>(family_count()));
  for (auto& s : free_serials) {
    for (int i = 0; i < 80; ++i) s.push_back(i);
    std::shuffle(s.begin(), s.end(), rng);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto f = static_cast<int>(between(rng, 0, static_cast<std::size_t>(family_count() - 1)));
    auto& serials = free_serials[static_cast<std::size_t>(f)];
    c.ids.push_back(make_id(f, serials.back()));
    serials.pop_back();
  }
  std::vector<SyntheticId> outsiders;
  for (int i = 0; i < 3; ++i) {
    outsiders.push_back(make_id(static_cast<int>(between(rng, 0, 8)), 80 + static_cast<int>(between(rng, 0, 9))));
  }

  for (std::size_t i = 0; i < n; ++i) {
    const auto key = "r" + std::to_string(i);
    c.index[c.ids[i].canonical].insert(key);
    auto make_doc = [&] {
      std::string text;
      if (chance(rng, 0.7)) mention(rng, text, any_variant(rng, c.ids[i]));
      const auto mentions = between(rng, 0, 3);
      for (std::size_t m = 0; m < mentions; ++m) {
        const auto& target = chance(rng, 0.8) ? c.ids[between(rng, 0, n - 1)] : pick(rng, outsiders);
        mention(rng, text, any_variant(rng, target));
      }
      text += filler(rng, between(rng, 0, 6));
      return text;
    };
    auto& docs = c.texts[key];
    docs[certlab::DocKind::certificate_report].push_back(make_doc());
    if (chance(rng, 0.7)) docs[certlab::DocKind::security_target].push_back(make_doc());
    const auto updates = between(rng, 0, 2);
    for (std::size_t u = 0; u < updates; ++u) docs[certlab::DocKind::maintenance_update].push_back(make_doc());
  }
  return c;
}

refgraph::ReferenceGraph graph_oracle(const GraphCorpus& corpus) {
  std::set<std::string> nodes;
  for (const auto& id : corpus.ids) nodes.insert(id.canonical);
  std::map<std::pair<std::string, std::string>, refgraph::Provenance> found;
  for (std::size_t a = 0; a < corpus.ids.size(); ++a) {
    const auto it = corpus.texts.find("r" + std::to_string(a));
    if (it == corpus.texts.end()) continue;
    for (const auto& [kind, docs] : it->second) {
      for (const auto& text : docs) {
        for (std::size_t b = 0; b < corpus.ids.size(); ++b) {
          if (corpus.ids[a].canonical == corpus.ids[b].canonical) continue;
          for (const auto& v : corpus.ids[b].variants) {
            if (oracle::delimited_contains(text, v)) found[{corpus.ids[a].canonical, corpus.ids[b].canonical}].insert(kind);
          }
        }
      }
    }
  }
  std::vector<refgraph::Edge> edges;
  for (const auto& [k, prov] : found) edges.push_back({k.first, k.second, prov});
  return refgraph::ReferenceGraph(nodes, edges);
}

GraphCorpus star_corpus(std::size_t referencers) {
  std::mt19937 rng(120);
  GraphCorpus c;
  c.ids.push_back(make_id(2, 0));
  c.ids.push_back(make_id(2, 1));
  for (std::size_t i = 0; i < referencers; ++i) {
    c.ids.push_back(make_id(static_cast<int>(i % 9), 2 + static_cast<int>(i / 9)));
  }
  for (std::size_t i = 0; i < c.ids.size(); ++i) {
    const auto key = "r" + std::to_string(i);
    c.index[c.ids[i].canonical].insert(key);
    std::string text;
    mention(rng, text, c.ids[i].canonical);
    if (i >= 2) {
      const auto which = between(rng, 0, 2);
      if (which != 1) mention(rng, text, any_variant(rng, c.ids[0]));
      if (which != 0) mention(rng, text, any_variant(rng, c.ids[1]));
    }
    c.texts[key][certlab::DocKind::certificate_report].push_back(text);
  }
  return c;
}

std::vector<LabeledReport> labeled_id_corpus(std::size_t count, unsigned seed) {
  std::mt19937 rng(seed);
  std::vector<LabeledReport> out;
  std::vector<std::vector<int>> free_serials(static_cast<std::size_t>(family_count()));
  for (auto& s : free_serials) {
    for (int i = 0; i < 90; ++i) s.push_back(i);
    std::shuffle(s.begin(), s.end(), rng);
  }
  auto fresh = [&](int family) {
    auto& serials = free_serials[static_cast<std::size_t>(family)];
    if (serials.empty()) return make_id(family, 89);
    auto id = make_id(family, serials.back());
    serials.pop_back();
    return id;
  };

  for (std::size_t i = 0; i < count; ++i) {
    const auto family = static_cast<int>(i % static_cast<std::size_t>(family_count()));
    const auto own = fresh(family);
    // Certificates this report cites: same-scheme platforms and foreign ones.
    std::vector<SyntheticId> cited;
    const auto same = between(rng, 0, 2);
    for (std::size_t k = 0; k < same; ++k) cited.push_back(fresh(family));
    const auto foreign = between(rng, 0, 2);
    for (std::size_t k = 0; k < foreign; ++k) cited.push_back(fresh(static_cast<int>(between(rng, 0, 8))));

    LabeledReport r;
    r.true_canonical = own.canonical;
    auto& rec = r.record;
    rec.record_key = "doc" + pad(static_cast<long long>(i), 3);
    rec.scheme = own.scheme;
    rec.category = "Other Devices and Systems";
    rec.title = "Synthetic product " + std::to_string(i);
    rec.vendor = "Example Vendor";
    rec.cert_date = certlab::parse_date("2020-01-01");
    std::string file = "report_" + pad(static_cast<long long>(i), 4);
    if (chance(rng, 0.4) && own.canonical.find('/') == std::string::npos) file = own.canonical;
    rec.artifact_paths[certlab::DocKind::certificate_report] = "reports/" + file + ".txt";
    if (chance(rng, 0.5)) rec.report_pdf_metadata = "Certification Report " + any_variant(rng, own);

    // Some front pages lack the ID (scanned cover sheets). A cover that cites
    // a platform always names its own certificate too.
    std::string text = "Certification Report\n" + rec.title + "\n";
    const bool own_on_cover = chance(rng, 0.85);
    if (own_on_cover) text += any_variant(rng, own) + "\n";
    if (own_on_cover && !cited.empty() && chance(rng, 0.2)) text += "based on " + cited.front().canonical + "\n";
    text += filler(rng, 6) + "\n\f";
    // Body pages carry a running header with the report's own ID, which the
    // text conversion sometimes loses.
    const auto pages = between(rng, 2, 4);
    for (std::size_t p = 0; p < pages; ++p) {
      if (chance(rng, 0.7)) text += "Certification Report " + any_variant(rng, own) + "\n";
      if (p == 0) {
        const auto own_mentions = between(rng, 1, 5);
        for (std::size_t k = 0; k < own_mentions; ++k) mention(rng, text, any_variant(rng, own));
      }
      if (p < cited.size()) {
        const auto times = between(rng, 1, 3);
        for (std::size_t k = 0; k < times; ++k) mention(rng, text, any_variant(rng, cited[p]));
      }
      text += filler(rng, 12) + "\n\f";
    }
    for (std::size_t c = pages; c < cited.size(); ++c) mention(rng, text, any_variant(rng, cited[c]));
    text += filler(rng, 12) + "\n";
    r.report_text = std::move(text);
    out.push_back(std::move(r));
  }
  return out;
}

namespace {

std::string varied_line(std::size_t alnum, std::size_t length) {
  static const std::string letters = "abcdefghijklmnopqrstuvwxyz0123456789";
  std::string line;
  for (std::size_t i = 0; i < length; ++i) line.push_back(i < alnum ? letters[i % letters.size()] : '-');
  return line;
}

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) out += (i ? "\n" : "") + lines[i];
  return out;
}

}  // namespace

std::vector<ConversionFixture> conversion_boundary_fixtures() {
  std::vector<ConversionFixture> out;
  auto lines_of = [](std::size_t n, std::size_t len) { return std::vector<std::string>(n, varied_line(len, len)); };

  // 1: line count
  out.push_back({"lines_at_30", join_lines(lines_of(30, 40)), {}});
  out.push_back({"lines_29", join_lines(lines_of(29, 40)), {1}});

  // 2: byte size, 40 lines with 39 separators
  auto bytes = lines_of(40, 24);
  bytes.back() = varied_line(25, 25);
  out.push_back({"bytes_at_1000", join_lines(bytes), {}});
  bytes.back() = varied_line(24, 24);
  out.push_back({"bytes_999", join_lines(bytes), {2}});

  // 3: average line length
  auto avg = lines_of(48, 20);
  out.push_back({"avg_len_at_20", join_lines(avg), {}});
  avg.back() = varied_line(19, 19);
  out.push_back({"avg_len_below_20", join_lines(avg), {3}});

  // 4: lines whose even-indexed characters differ
  auto varied = [](std::size_t good) {
    std::vector<std::string> lines(40, std::string(30, 'a'));
    for (std::size_t i = 0; i < good; ++i) lines[i] = varied_line(30, 30);
    return lines;
  };
  out.push_back({"varied_at_15", join_lines(varied(15)), {}});
  out.push_back({"varied_14", join_lines(varied(14)), {4}});

  // 5: alphanumeric ratio over 41 lines of 30 characters (1270 bytes)
  auto ratio = [](std::size_t alnum_total) {
    std::vector<std::string> lines;
    for (std::size_t i = 0; i < 41; ++i) {
      const auto share = alnum_total / 41 + (i < alnum_total % 41 ? 1 : 0);
      lines.push_back(varied_line(share, 30));
    }
    return lines;
  };
  out.push_back({"alnum_at_half", join_lines(ratio(635)), {}});
  out.push_back({"alnum_below_half", join_lines(ratio(634)), {5}});
  return out;
}

}  // namespace corpus
