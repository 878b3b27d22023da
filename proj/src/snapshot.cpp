#include "certlab/snapshot.hpp"

#include <boost/regex.hpp>
#include <httplib.h>

#include <ctime>
#include <filesystem>
#include <fstream>

#include "certlab/serialize.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace certlab::snapshot {

Date Snapshot::snapshot_date() const {
  if (created.size() < 10) throw SchemaError("snapshot has no creation timestamp");
  return parse_date(std::string_view(created).substr(0, 10));
}

const ingest::CertRecord* Snapshot::find(const std::string& record_key) const {
  for (const auto& r : records) {
    if (r.record_key == record_key) return &r;
  }
  return nullptr;
}

std::string current_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json to_json(const Snapshot& s) {
  return {
      {"schema_version", s.schema_version},
      {"created", s.created},
      {"artifacts_root", s.artifacts_root},
      {"records", json_io::records_to_json(s.records)},
      {"features", json_io::features_to_json(s.features)},
      {"ids", json_io::ids_to_json(s.ids)},
      {"graph", json_io::graph_to_json(s.graph)},
      {"matches", json_io::matches_to_json(s.matches)},
      {"report", s.report},
  };
}

Snapshot snapshot_from_json(const json& j) {
  if (!j.is_object() || !j.contains("schema_version")) throw SchemaError("not a snapshot document");
  Snapshot s;
  s.schema_version = j.at("schema_version").get<int>();
  if (s.schema_version != kSchemaVersion) {
    throw SchemaMismatch("snapshot schema_version " + std::to_string(s.schema_version) + " is not supported (expected " +
                         std::to_string(kSchemaVersion) + ")");
  }
  s.created = j.value("created", "");
  s.snapshot_date();
  s.artifacts_root = j.value("artifacts_root", "");
  s.records = json_io::records_from_json(j.at("records"));
  if (j.contains("features")) s.features = json_io::features_from_json(j.at("features"));
  if (j.contains("ids")) s.ids = json_io::ids_from_json(j.at("ids"));
  if (j.contains("graph")) s.graph = json_io::graph_from_json(j.at("graph"));
  if (j.contains("matches")) s.matches = json_io::matches_from_json(j.at("matches"));
  if (j.contains("report")) s.report = j.at("report");

  std::set<std::string> keys;
  for (const auto& r : s.records) {
    if (!keys.insert(r.record_key).second) throw SchemaError("duplicate record_key " + r.record_key);
  }
  auto check = [&](const std::string& key, const char* section) {
    if (!keys.count(key)) throw SchemaError(std::string(section) + " references unknown record_key " + key);
  };
  for (const auto& [key, _] : s.features) check(key, "features");
  for (const auto& [key, _] : s.ids) check(key, "ids");
  for (const auto& [key, _] : s.matches.results) check(key, "matches");
  std::set<std::string> canonical;
  for (const auto& [_, a] : s.ids) canonical.insert(a.id.canonical);
  for (const auto& node : s.graph.nodes()) {
    if (!canonical.count(node)) throw SchemaError("graph node " + node + " is not an assigned ID");
  }
  return s;
}

Snapshot load_snapshot(const std::string& path) {
  try {
    return snapshot_from_json(json_io::read_json_file(path));
  } catch (const SchemaMismatch&) {
    throw;
  } catch (const json::exception& e) {
    throw SchemaError(path + ": " + e.what());
  } catch (const SchemaError& e) {
    throw SchemaError(path + ": " + e.what());
  }
}

void save_snapshot(const std::string& path, const Snapshot& snapshot) {
  write_file(path, json_io::dump(to_json(snapshot)));
}

std::string resolve_artifacts_root(const std::string& snapshot_path, const Snapshot& snapshot) {
  const fs::path root(snapshot.artifacts_root);
  if (root.is_absolute()) return root.string();
  return (fs::absolute(snapshot_path).parent_path() / root).lexically_normal().string();
}

// --- diff ---------------------------------------------------------------------

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::new_cert: return "new_cert";
    case EventKind::new_cve: return "new_cve";
    case EventKind::removed_cve: return "removed_cve";
    case EventKind::id_changed: return "id_changed";
    case EventKind::reference_added: return "reference_added";
    case EventKind::reference_removed: return "reference_removed";
    case EventKind::status_changed: return "status_changed";
  }
  return "new_cert";
}

EventKind event_kind_from_string(std::string_view text) {
  for (auto kind : {EventKind::new_cert, EventKind::new_cve, EventKind::removed_cve, EventKind::id_changed,
                    EventKind::reference_added, EventKind::reference_removed, EventKind::status_changed}) {
    if (to_string(kind) == text) return kind;
  }
  throw SchemaError("unknown event kind '" + std::string(text) + "'");
}

ReplayState replay_state(const Snapshot& s) {
  ReplayState state;
  for (const auto& [key, result] : s.matches.results) {
    if (!result.cves.empty()) state.cves[key] = result.cves;
  }
  for (const auto& [key, a] : s.ids) {
    if (!s.graph.contains(a.id.canonical)) continue;
    const auto& refs = s.graph.successors(a.id.canonical);
    if (!refs.empty()) state.references[key] = refs;
  }
  return state;
}

ReplayState apply_events(ReplayState state, const std::vector<DiffEvent>& events) {
  for (const auto& e : events) {
    switch (e.kind) {
      case EventKind::new_cve: state.cves[e.record_key].insert(e.detail); break;
      case EventKind::removed_cve: state.cves[e.record_key].erase(e.detail); break;
      case EventKind::reference_added: state.references[e.record_key].insert(e.detail); break;
      case EventKind::reference_removed: state.references[e.record_key].erase(e.detail); break;
      default: break;
    }
  }
  std::erase_if(state.cves, [](const auto& kv) { return kv.second.empty(); });
  std::erase_if(state.references, [](const auto& kv) { return kv.second.empty(); });
  return state;
}

namespace {

void set_delta(std::vector<DiffEvent>& out, const std::string& key, const std::set<std::string>& before,
               const std::set<std::string>& after, EventKind added, EventKind removed) {
  for (const auto& v : after) {
    if (!before.count(v)) out.push_back({key, added, v});
  }
  for (const auto& v : before) {
    if (!after.count(v)) out.push_back({key, removed, v});
  }
}

template <class Map>
const std::set<std::string>& lookup(const Map& m, const std::string& key) {
  static const std::set<std::string> none;
  auto it = m.find(key);
  return it == m.end() ? none : it->second;
}

std::string id_or_none(const IdMap& ids, const std::string& key) {
  auto it = ids.find(key);
  return it == ids.end() ? "none" : it->second.id.canonical;
}

}  // namespace

std::vector<DiffEvent> diff(const Snapshot& old_s, const Snapshot& new_s) {
  if (old_s.schema_version != new_s.schema_version) {
    throw SchemaMismatch("cannot diff schema versions " + std::to_string(old_s.schema_version) + " and " +
                         std::to_string(new_s.schema_version));
  }
  std::vector<DiffEvent> events;
  const auto before = replay_state(old_s);
  const auto after = replay_state(new_s);

  std::set<std::string> keys;
  for (const auto& r : old_s.records) keys.insert(r.record_key);
  for (const auto& r : new_s.records) keys.insert(r.record_key);

  for (const auto& key : keys) {
    const auto* o = old_s.find(key);
    const auto* n = new_s.find(key);
    if (!o && n) events.push_back({key, EventKind::new_cert, n->title});
    if (o && n && o->status != n->status) {
      events.push_back({key, EventKind::status_changed,
                        std::string(ingest::to_string(o->status)) + " -> " + std::string(ingest::to_string(n->status))});
    }
    const auto old_id = id_or_none(old_s.ids, key);
    const auto new_id = id_or_none(new_s.ids, key);
    if (old_id != new_id) events.push_back({key, EventKind::id_changed, old_id + " -> " + new_id});
    set_delta(events, key, lookup(before.cves, key), lookup(after.cves, key), EventKind::new_cve,
              EventKind::removed_cve);
    set_delta(events, key, lookup(before.references, key), lookup(after.references, key),
              EventKind::reference_added, EventKind::reference_removed);
  }
  std::sort(events.begin(), events.end());
  return events;
}

json events_to_json(const std::vector<DiffEvent>& events) {
  json out = json::array();
  for (const auto& e : events) {
    out.push_back({{"record_key", e.record_key}, {"kind", std::string(to_string(e.kind))}, {"detail", e.detail}});
  }
  return out;
}

std::vector<DiffEvent> events_from_json(const json& j) {
  if (!j.is_array()) throw SchemaError("events must be an array");
  std::vector<DiffEvent> out;
  for (const auto& e : j) {
    out.push_back({e.at("record_key").get<std::string>(), event_kind_from_string(e.at("kind").get<std::string>()),
                   e.at("detail").get<std::string>()});
  }
  return out;
}

// --- full-text search -------------------------------------------------------------

struct WildcardQuery::Term {
  boost::regex regex;
};

WildcardQuery::WildcardQuery(std::string_view query) {
  const auto words = split_whitespace(to_lower(query));
  if (words.empty()) throw BadQuery("empty full-text query");
  for (const auto& word : words) {
    std::string pattern;
    for (char c : word) {
      if (c == '*') {
        pattern += ".*";
      } else if (c == '?') {
        pattern += '.';
      } else if (std::string_view(".^$|()[]{}+\\/").find(c) != std::string_view::npos) {
        pattern += '\\';
        pattern += c;
      } else {
        pattern += c;
      }
    }
    auto term = std::make_shared<Term>();
    term->regex = boost::regex(pattern, boost::regex::perl | boost::regex::mod_s);
    terms_.push_back(std::move(term));
  }
}

bool WildcardQuery::matches(const std::vector<std::string>& tokens) const {
  if (tokens.size() < terms_.size()) return false;
  for (std::size_t start = 0; start + terms_.size() <= tokens.size(); ++start) {
    bool all = true;
    for (std::size_t j = 0; j < terms_.size() && all; ++j) {
      all = boost::regex_match(tokens[start + j], terms_[j]->regex);
    }
    if (all) return true;
  }
  return false;
}

FullTextIndex::FullTextIndex(const refgraph::ArtifactTexts& texts) {
  for (const auto& [key, by_kind] : texts) {
    for (const auto& [kind, docs] : by_kind) {
      for (const auto& text : docs) docs_.push_back({key, kind, split_whitespace(to_lower(text))});
    }
  }
}

std::vector<SearchHit> FullTextIndex::search(std::string_view query) const {
  const WildcardQuery q(query);
  std::map<std::string, std::set<DocKind>> found;
  for (const auto& doc : docs_) {
    if (q.matches(doc.tokens)) found[doc.record_key].insert(doc.kind);
  }
  std::vector<SearchHit> out;
  for (auto& [key, kinds] : found) out.push_back({key, std::move(kinds)});
  return out;
}

// --- subscriptions ----------------------------------------------------------------

Selector Selector::parse(std::string_view text) {
  Selector sel;
  const auto trimmed = trim(text);
  if (trimmed.empty()) throw BadSelector("empty selector");
  std::size_t pos = 0;
  while (pos <= trimmed.size()) {
    auto amp = trimmed.find('&', pos);
    if (amp == std::string::npos) amp = trimmed.size();
    const auto pair = trimmed.substr(pos, amp - pos);
    pos = amp + 1;
    const auto eq = pair.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == pair.size()) {
      throw BadSelector("selector term must be key=value: '" + pair + "'");
    }
    const auto key = pair.substr(0, eq);
    const auto value = pair.substr(eq + 1);
    if (key == "record_key") {
      sel.record_key = value;
    } else if (key == "kind") {
      try {
        sel.kind = event_kind_from_string(value);
      } catch (const SchemaError&) {
        throw BadSelector("unknown event kind '" + value + "'");
      }
    } else if (key == "cve") {
      sel.cve = value;
    } else {
      throw BadSelector("unknown selector key '" + key + "'");
    }
  }
  return sel;
}

bool Selector::matches(const DiffEvent& e) const {
  if (record_key && *record_key != e.record_key) return false;
  if (kind && *kind != e.kind) return false;
  if (cve) {
    if (e.kind != EventKind::new_cve && e.kind != EventKind::removed_cve) return false;
    if (*cve != e.detail) return false;
  }
  return true;
}

namespace {

json event_line(const std::string& id, const DiffEvent& e) {
  return {{"subscription", id},
          {"record_key", e.record_key},
          {"kind", std::string(to_string(e.kind))},
          {"detail", e.detail}};
}

class LogSink : public Sink {
 public:
  explicit LogSink(std::string path) : path_(std::move(path)) {}
  void deliver(const std::string& id, const DiffEvent& e) override {
    std::ofstream out(path_, std::ios::app);
    if (!out) throw Error("cannot append to " + path_);
    out << event_line(id, e).dump() << '\n';
  }

 private:
  std::string path_;
};

class WebhookSink : public Sink {
 public:
  WebhookSink(std::string origin, std::string path) : origin_(std::move(origin)), path_(std::move(path)) {}
  void deliver(const std::string& id, const DiffEvent& e) override {
    httplib::Client client(origin_);
    client.set_connection_timeout(5);
    auto res = client.Post(path_, event_line(id, e).dump(), "application/json");
    if (!res || res->status >= 300) throw Error("webhook delivery to " + origin_ + path_ + " failed");
  }

 private:
  std::string origin_;
  std::string path_;
};

}  // namespace

std::unique_ptr<Sink> make_sink(std::string_view spec) {
  if (spec.rfind("log:", 0) == 0 && spec.size() > 4) return std::make_unique<LogSink>(std::string(spec.substr(4)));
  if (spec.rfind("webhook:", 0) == 0) {
    static const boost::regex url(R"(^(http://[^/\s]+)(/\S*)?$)");
    const std::string rest(spec.substr(8));
    boost::smatch m;
    if (!boost::regex_match(rest, m, url)) throw BadSelector("webhook sink needs an http:// URL");
    return std::make_unique<WebhookSink>(m[1].str(), m[2].matched ? m[2].str() : "/");
  }
  throw BadSelector("sink must be log:<path> or webhook:<url>, got '" + std::string(spec) + "'");
}

std::string SubscriptionRegistry::subscribe(std::string_view selector, std::string_view sink_spec) {
  return subscribe(selector, make_sink(sink_spec));
}

std::string SubscriptionRegistry::subscribe(std::string_view selector, std::unique_ptr<Sink> sink) {
  auto sel = Selector::parse(selector);
  std::lock_guard lock(mutex_);
  std::string id = "sub-" + std::to_string(next_id_++);
  subscriptions_.push_back({id, std::move(sel), std::move(sink), {}});
  return id;
}

std::size_t SubscriptionRegistry::notify(const std::vector<DiffEvent>& events) {
  std::lock_guard lock(mutex_);
  std::size_t delivered = 0;
  for (auto& sub : subscriptions_) {
    for (const auto& e : events) {
      if (!sub.selector.matches(e)) continue;
      if (sub.sink) {
        try {
          sub.sink->deliver(sub.id, e);
        } catch (const Error&) {
          ++failed_;
          continue;
        }
      }
      sub.delivered.push_back(e);
      ++delivered;
    }
  }
  return delivered;
}

std::vector<Delivery> SubscriptionRegistry::deliveries(const std::string& subscription_id) const {
  std::lock_guard lock(mutex_);
  std::vector<Delivery> out;
  for (const auto& sub : subscriptions_) {
    if (sub.id != subscription_id) continue;
    for (const auto& e : sub.delivered) out.push_back({sub.id, e});
  }
  return out;
}

std::size_t SubscriptionRegistry::failed_deliveries() const {
  std::lock_guard lock(mutex_);
  return failed_;
}

std::size_t SubscriptionRegistry::size() const {
  std::lock_guard lock(mutex_);
  return subscriptions_.size();
}

}  // namespace certlab::snapshot
