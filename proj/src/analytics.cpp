#include "certlab/analytics.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <boost/regex.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "embedded_data.hpp"

namespace certlab::analytics {

namespace {

const boost::regex& sar_regex() {
  static const boost::regex re(R"(\b([A-Z]{3}_[A-Z]{3})\.([0-9]+)\b)");
  return re;
}

const boost::regex& eal_regex() {
  static const boost::regex re(R"(EAL\s*([1-7])(\s*\+|\s+augmented)?)", boost::regex::perl | boost::regex::icase);
  return re;
}

}  // namespace

std::optional<SarLevel> parse_sar(std::string_view token) {
  boost::match_results<std::string_view::const_iterator> m;
  if (!boost::regex_match(token.begin(), token.end(), m, sar_regex())) return std::nullopt;
  const int level = std::stoi(m[2].str());
  if (level < 1) return std::nullopt;
  return SarLevel{m[1].str(), level};
}

std::string EalRank::label() const { return "EAL" + std::to_string(base) + (augmented ? "+" : ""); }

std::optional<EalRank> parse_eal(std::string_view text) {
  boost::match_results<std::string_view::const_iterator> m;
  if (!boost::regex_search(text.begin(), text.end(), m, eal_regex())) return std::nullopt;
  return EalRank{m[1].str()[0] - '0', m[2].matched};
}

SarProfile reconstruct_sars(const ingest::CertRecord& record, const rules::GroupHits& st_hits,
                            const rules::GroupHits& cr_hits) {
  SarProfile profile;
  std::map<std::string, std::set<int>> seen;
  auto note = [&](const SarLevel& sar) { seen[sar.family].insert(sar.level); };

  if (record.declared_eal) {
    const auto& text = *record.declared_eal;
    for (boost::sregex_iterator it(text.begin(), text.end(), sar_regex()), end; it != end; ++it) {
      note(SarLevel{(*it)[1].str(), std::stoi((*it)[2].str())});
    }
    profile.eal = parse_eal(text);
  }

  std::map<int, std::pair<std::size_t, EalRank>> eal_counts;  // rank -> (count, eal)
  for (const auto* hits : {&st_hits, &cr_hits}) {
    if (auto sar = hits->find("sar"); sar != hits->end()) {
      for (const auto& [token, count] : sar->second) {
        if (auto parsed = parse_sar(token)) note(*parsed);
      }
    }
    if (auto levels = hits->find("evaluation_level"); levels != hits->end()) {
      for (const auto& [token, count] : levels->second) {
        if (auto eal = parse_eal(token)) {
          auto& slot = eal_counts[eal->rank()];
          slot.first += count;
          slot.second = *eal;
        }
      }
    }
  }
  if (!profile.eal && !eal_counts.empty()) {
    auto best = eal_counts.begin();
    for (auto it = eal_counts.begin(); it != eal_counts.end(); ++it) {
      if (it->second.first >= best->second.first) best = it;
    }
    profile.eal = best->second.second;
  }

  for (const auto& [family, levels] : seen) {
    profile.levels[family] = *levels.rbegin();
    if (levels.size() > 1) profile.conflicts.insert(family);
  }
  return profile;
}

// --- Spearman -----------------------------------------------------------------

std::vector<double> average_ranks(const std::vector<double>& values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

namespace {

// Doubled average ranks are integers, so the rank statistics stay exact.
std::vector<long long> doubled_ranks(const std::vector<double>& values) {
  std::vector<long long> out;
  out.reserve(values.size());
  for (double r : average_ranks(values)) out.push_back(std::llround(r * 2.0));
  return out;
}

long long dot(const std::vector<long long>& a, const std::vector<long long>& b) {
  long long s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

double spearman_t_pvalue(double rho, std::size_t n) {
  if (n < 3) throw DegenerateInput("t approximation needs n >= 3");
  if (rho <= -1.0) return 0.0;
  if (rho >= 1.0) return 1.0;
  const double df = static_cast<double>(n - 2);
  const double t = rho * std::sqrt(df / (1.0 - rho * rho));
  return boost::math::cdf(boost::math::students_t_distribution<double>(df), t);
}

SpearmanResult spearman_less(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw DegenerateInput("x and y differ in length");
  const std::size_t n = x.size();
  if (n < 3) throw DegenerateInput("spearman needs at least 3 observations");

  const auto a = doubled_ranks(x);
  const auto b = doubled_ranks(y);
  const auto sum_a = std::accumulate(a.begin(), a.end(), 0LL);
  const auto sum_b = std::accumulate(b.begin(), b.end(), 0LL);
  const auto nn = static_cast<__int128>(n);
  const __int128 sxy = nn * dot(a, b) - static_cast<__int128>(sum_a) * sum_b;
  const __int128 sxx = nn * dot(a, a) - static_cast<__int128>(sum_a) * sum_a;
  const __int128 syy = nn * dot(b, b) - static_cast<__int128>(sum_b) * sum_b;
  if (sxx == 0 || syy == 0) throw DegenerateInput("constant input; rank correlation undefined");

  SpearmanResult result;
  if (sxy * sxy == sxx * syy) {
    result.rho = sxy > 0 ? 1.0 : -1.0;
  } else {
    result.rho = static_cast<double>(sxy) / std::sqrt(static_cast<double>(sxx) * static_cast<double>(syy));
  }

  if (n <= kExactLimit) {
    // rho is increasing in sum(a * b_perm), whose denominator is fixed under
    // permutations of y.
    const long long observed = dot(a, b);
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    long long at_most = 0;
    long long total = 0;
    do {
      long long s = 0;
      for (std::size_t i = 0; i < n; ++i) s += a[i] * b[idx[i]];
      if (s <= observed) ++at_most;
      ++total;
    } while (std::next_permutation(idx.begin(), idx.end()));
    result.exact_p = Rational(at_most, total);
    result.p_value = boost::rational_cast<double>(*result.exact_p);
  } else {
    result.p_value = spearman_t_pvalue(result.rho, n);
  }
  return result;
}

// --- dataset analyses -------------------------------------------------------------

std::vector<const vulnmap::CveEntry*> cves_during_validity(const Dataset& data, const ingest::CertRecord& record) {
  std::vector<const vulnmap::CveEntry*> out;
  auto match = data.matches.find(record.record_key);
  if (match == data.matches.end()) return out;
  const Date end = record.expiry_date.value_or(data.snapshot_date);
  for (const auto& id : match->second.cves) {
    auto cve = data.cves.find(id);
    if (cve == data.cves.end()) continue;
    const auto& published = cve->second.published;
    if (record.cert_date <= published && published < end) out.push_back(&cve->second);
  }
  return out;
}

namespace {

struct Observation {
  int level = 0;
  double cve_count = 0;
  double avg_score = 0;
};

void correlate(CorrelationResult& row, const std::vector<Observation>& obs, double significance) {
  std::vector<double> x, y;
  for (const auto& o : obs) {
    x.push_back(o.level);
    y.push_back(o.cve_count);
  }
  try {
    auto r = spearman_less(x, y);
    row.rho_cve_count = r.rho;
    row.p_cve_count = r.p_value;
    row.significant_cve_count = r.p_value < significance;
  } catch (const DegenerateInput&) {
  }
  x.clear();
  y.clear();
  for (const auto& o : obs) {
    if (o.cve_count == 0) continue;
    x.push_back(o.level);
    y.push_back(o.avg_score);
  }
  try {
    auto r = spearman_less(x, y);
    row.rho_base_score = r.rho;
    row.p_base_score = r.p_value;
    row.significant_base_score = r.p_value < significance;
  } catch (const DegenerateInput&) {
  }
}

void fill_counts(CorrelationResult& row, const std::vector<Observation>& obs) {
  std::set<int> levels;
  for (const auto& o : obs) {
    levels.insert(o.level);
    if (o.cve_count > 0) ++row.support;
  }
  row.sample_size = obs.size();
  row.domain_range = levels.size();
}

}  // namespace

std::vector<CorrelationResult> correlate_all(const Dataset& data, const CorrelationOptions& options) {
  std::set<std::string> excluded;
  for (const auto& c : options.excluded_categories) excluded.insert(to_lower(c));

  std::map<std::string, std::vector<Observation>> by_family;
  std::vector<Observation> eal_obs;
  for (const auto& record : data.records) {
    if (excluded.count(to_lower(record.category))) continue;
    auto profile = data.sars.find(record.record_key);
    if (profile == data.sars.end()) continue;
    const auto cves = cves_during_validity(data, record);
    Observation base;
    base.cve_count = static_cast<double>(cves.size());
    if (!cves.empty()) {
      double total = 0;
      for (const auto* c : cves) total += c->base_score;
      base.avg_score = total / static_cast<double>(cves.size());
    }
    for (const auto& [family, level] : profile->second.levels) {
      auto o = base;
      o.level = level;
      by_family[family].push_back(o);
    }
    if (profile->second.eal) {
      auto o = base;
      o.level = profile->second.eal->rank();
      eal_obs.push_back(o);
    }
  }

  std::vector<CorrelationResult> out;
  CorrelationResult eal_row;
  eal_row.variable = "EAL";
  fill_counts(eal_row, eal_obs);
  correlate(eal_row, eal_obs, options.significance);
  out.push_back(eal_row);

  for (const auto& [family, obs] : by_family) {
    CorrelationResult row;
    row.variable = family;
    fill_counts(row, obs);
    if (row.support <= options.min_support) continue;
    std::map<int, std::size_t> per_level;
    for (const auto& o : obs) ++per_level[o.level];
    const auto diverse = std::count_if(per_level.begin(), per_level.end(),
                                       [&](const auto& kv) { return kv.second > options.min_level_count; });
    if (diverse < 2) continue;
    correlate(row, obs, options.significance);
    out.push_back(row);
  }
  return out;
}

TimelineStats timeline_stats(const Dataset& data) {
  TimelineStats stats;
  long long before = 0;
  long long during = 0;
  for (const auto& record : data.records) {
    auto match = data.matches.find(record.record_key);
    if (match == data.matches.end()) continue;
    const Date end = record.expiry_date.value_or(data.snapshot_date);
    for (const auto& id : match->second.cves) {
      auto cve = data.cves.find(id);
      if (cve == data.cves.end()) continue;
      const auto& published = cve->second.published;
      if (published < record.cert_date) ++before;
      if (record.cert_date <= published && published < end) ++during;
      stats.offsets.push_back({record.record_key, id, days_between(record.cert_date, published)});
    }
  }
  stats.pair_count = stats.offsets.size();
  std::sort(stats.offsets.begin(), stats.offsets.end(), [](const auto& a, const auto& b) {
    return std::tie(a.record_key, a.cve_id) < std::tie(b.record_key, b.cve_id);
  });
  if (stats.pair_count > 0) {
    const auto total = static_cast<long long>(stats.pair_count);
    stats.frac_before_cert = Rational(before, total);
    stats.frac_after_cert = Rational(total - before, total);
    stats.frac_during_validity = Rational(during, total);
  }
  return stats;
}

std::map<std::string, std::string> parse_cwe_names(std::string_view text) {
  std::map<std::string, std::string> names;
  std::istringstream in{std::string(text)};
  for (std::string line; std::getline(in, line);) {
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto bar = t.find('|');
    if (bar == std::string::npos) throw SchemaError("CWE name line needs 'id|name': " + t);
    names[trim(t.substr(0, bar))] = trim(t.substr(bar + 1));
  }
  return names;
}

const std::map<std::string, std::string>& bundled_cwe_names() {
  static const auto names = parse_cwe_names(data::cwe_names());
  return names;
}

std::vector<CweRow> cwe_table(const Dataset& data, const std::map<std::string, std::string>& names) {
  std::set<std::string> cve_ids;
  for (const auto& [key, match] : data.matches) cve_ids.insert(match.cves.begin(), match.cves.end());
  std::map<std::string, std::size_t> counts;
  for (const auto& id : cve_ids) {
    auto cve = data.cves.find(id);
    if (cve == data.cves.end()) continue;
    for (const auto& cwe : cve->second.cwe_ids) ++counts[cwe];
  }
  std::vector<CweRow> rows;
  for (const auto& [cwe, count] : counts) {
    auto name = names.find(cwe);
    rows.push_back({cwe, name == names.end() ? std::string{} : name->second, count});
  }
  auto number = [](const std::string& id) -> long long {
    if (id.rfind("CWE-", 0) != 0) return -1;
    try {
      std::size_t used = 0;
      const auto n = std::stoll(id.substr(4), &used);
      return used == id.size() - 4 ? n : -1;
    } catch (const std::exception&) {
      return -1;
    }
  };
  std::sort(rows.begin(), rows.end(), [&](const CweRow& a, const CweRow& b) {
    if (a.cve_count != b.cve_count) return a.cve_count > b.cve_count;
    const auto na = number(a.cwe_id), nb = number(b.cwe_id);
    if ((na < 0) != (nb < 0)) return na >= 0;
    if (na != nb) return na < nb;
    return a.cwe_id < b.cwe_id;
  });
  return rows;
}

std::vector<MaintenanceRow> maintenance_cve_screen(const Dataset& data) {
  std::vector<MaintenanceRow> rows;
  for (const auto& record : data.records) {
    auto match = data.matches.find(record.record_key);
    if (match == data.matches.end() || record.maintenance_updates.empty()) continue;
    auto updates = record.maintenance_updates;
    std::sort(updates.begin(), updates.end(),
              [](const auto& a, const auto& b) { return std::tie(a.date, a.path) < std::tie(b.date, b.path); });
    for (const auto& update : updates) {
      MaintenanceRow row{record.record_key, update.date, {}, {}};
      for (const auto& id : match->second.cves) {
        auto cve = data.cves.find(id);
        if (cve == data.cves.end()) continue;
        const auto& published = cve->second.published;
        if (published < record.cert_date) {
          row.pre_certification_cves.push_back(id);
        } else if (published < update.date) {
          row.cves_in_window.push_back(id);
        }
      }
      if (!row.cves_in_window.empty() || !row.pre_certification_cves.empty()) rows.push_back(std::move(row));
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return std::tie(a.record_key, a.update_date) < std::tie(b.record_key, b.update_date);
  });
  return rows;
}

std::vector<ShortValidityRow> short_validity_screen(const Dataset& data, std::int64_t max_days) {
  std::vector<ShortValidityRow> rows;
  for (const auto& record : data.records) {
    if (!record.expiry_date) continue;
    const auto days = days_between(record.cert_date, *record.expiry_date);
    if (days >= max_days) continue;
    auto match = data.matches.find(record.record_key);
    rows.push_back({record.record_key, days, match != data.matches.end() && !match->second.cves.empty()});
  }
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.record_key < b.record_key; });
  return rows;
}

}  // namespace certlab::analytics
