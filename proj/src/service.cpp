#include "certlab/service.hpp"

#include <httplib.h>

#include <charconv>

#include "certlab/serialize.hpp"

using nlohmann::json;

namespace certlab::service {

std::shared_ptr<const State> make_state(snapshot::Snapshot snap, const refgraph::ArtifactTexts& texts) {
  auto state = std::make_shared<State>();
  state->snapshot = std::move(snap);
  state->index = snapshot::FullTextIndex(texts);
  for (const auto& r : state->snapshot.records) state->by_key[r.record_key] = &r;
  for (const auto& [key, a] : state->snapshot.ids) state->records_of_canonical[a.id.canonical].insert(key);
  for (const auto& [key, m] : state->snapshot.matches.results) {
    for (const auto& cve : m.cves) state->records_of_cve[cve].insert(key);
  }
  return state;
}

std::vector<snapshot::DiffEvent> SnapshotStore::publish(snapshot::Snapshot snap,
                                                        const refgraph::ArtifactTexts& texts) {
  auto next = make_state(std::move(snap), texts);
  std::vector<snapshot::DiffEvent> events;
  {
    std::lock_guard lock(mutex_);
    for (const auto& old : history_) {
      if (old->snapshot.created == next->snapshot.created) {
        throw Error("snapshot version " + next->snapshot.created + " is already loaded");
      }
    }
    if (current_) events = snapshot::diff(current_->snapshot, next->snapshot);
    history_.push_back(next);
    current_ = next;
  }
  subscriptions_.notify(events);
  return events;
}

std::shared_ptr<const State> SnapshotStore::current() const {
  std::lock_guard lock(mutex_);
  return current_;
}

std::shared_ptr<const State> SnapshotStore::version(const std::string& created) const {
  std::lock_guard lock(mutex_);
  for (const auto& s : history_) {
    if (s->snapshot.created == created) return s;
  }
  return nullptr;
}

std::vector<std::string> SnapshotStore::versions() const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> out;
  for (const auto& s : history_) out.push_back(s->snapshot.created);
  return out;
}

// --- request handling ----------------------------------------------------------------

namespace {

struct HttpError {
  int status;
  std::string message;
};

[[noreturn]] void fail(int status, std::string message) { throw HttpError{status, std::move(message)}; }

std::string param(const Request& req, const char* name) {
  auto it = req.params.find(name);
  return it == req.params.end() ? std::string{} : it->second;
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::string current;
  for (char c : path) {
    if (c == '/') {
      if (!current.empty()) parts.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) parts.push_back(std::move(current));
  return parts;
}

const ingest::CertRecord& record_or_404(const State& s, const std::string& key) {
  auto it = s.by_key.find(key);
  if (it == s.by_key.end()) fail(404, "unknown record_key " + key);
  return *it->second;
}

json summary(const State& s, const ingest::CertRecord& r) {
  auto id = s.snapshot.ids.find(r.record_key);
  auto match = s.snapshot.matches.results.find(r.record_key);
  return {
      {"record_key", r.record_key},
      {"scheme", r.scheme},
      {"category", r.category},
      {"title", r.title},
      {"vendor", r.vendor},
      {"cert_date", format_date(r.cert_date)},
      {"status", std::string(ingest::to_string(r.status))},
      {"canonical_id", id == s.snapshot.ids.end() ? json(nullptr) : json(id->second.id.canonical)},
      {"cve_count", match == s.snapshot.matches.results.end() ? 0 : match->second.cves.size()},
  };
}

json list_certs(const State& s, const Request& req) {
  const auto q = to_lower(param(req, "q"));
  const auto scheme = to_lower(param(req, "scheme"));
  const auto category = to_lower(param(req, "category"));
  const auto status = param(req, "status");
  if (!status.empty()) {
    try {
      ingest::status_from_string(status);
    } catch (const SchemaError& e) {
      fail(400, e.what());
    }
  }
  json results = json::array();
  for (const auto& r : s.snapshot.records) {
    if (!q.empty() && to_lower(r.title).find(q) == std::string::npos) continue;
    if (!scheme.empty() && to_lower(r.scheme) != scheme) continue;
    if (!category.empty() && to_lower(r.category) != category) continue;
    if (!status.empty() && ingest::status_from_string(status) != r.status) continue;
    results.push_back(summary(s, r));
  }
  return {{"count", results.size()}, {"results", results}};
}

json cve_details(const State& s, const std::string& id) {
  auto it = s.snapshot.matches.cves.find(id);
  if (it == s.snapshot.matches.cves.end()) return nullptr;
  auto j = json_io::to_json(it->second);
  j["id"] = id;
  return j;
}

json cert_detail(const State& s, const std::string& key) {
  const auto& r = record_or_404(s, key);
  json out = {{"record", json_io::to_json(r)}};
  auto id = s.snapshot.ids.find(key);
  out["id"] = id == s.snapshot.ids.end() ? json(nullptr) : json_io::to_json(id->second.id);
  json features = json::object();
  if (auto f = s.snapshot.features.find(key); f != s.snapshot.features.end()) {
    for (const auto& [kind, groups] : f->second.per_source) features[std::string(to_string(kind))] = groups;
  }
  out["features"] = features;
  json cpes = json::array();
  json cves = json::array();
  if (auto m = s.snapshot.matches.results.find(key); m != s.snapshot.matches.results.end()) {
    cpes = json_io::to_json(m->second)["matched_cpes"];
    for (const auto& c : m->second.cves) cves.push_back(cve_details(s, c));
  }
  out["matched_cpes"] = cpes;
  out["cves"] = cves;
  return out;
}

std::optional<std::size_t> parse_depth(const std::string& text) {
  if (text.empty()) return 1;
  if (text == "all") return std::nullopt;
  std::size_t depth = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), depth);
  if (ec != std::errc{} || ptr != text.data() + text.size()) fail(400, "depth must be a non-negative integer or 'all'");
  return depth;
}

json references(const State& s, const std::string& key, const Request& req) {
  record_or_404(s, key);
  auto id = s.snapshot.ids.find(key);
  if (id == s.snapshot.ids.end()) fail(404, "record " + key + " has no certificate ID");
  const auto& canonical = id->second.id.canonical;
  refgraph::Direction direction;
  try {
    direction = refgraph::direction_from_string(param(req, "direction"));
  } catch (const Error& e) {
    fail(400, e.what());
  }
  const auto depth = parse_depth(param(req, "depth"));
  refgraph::ReferenceGraph sub;
  if (s.snapshot.graph.contains(canonical)) {
    sub = refgraph::neighborhood(s.snapshot.graph, canonical, direction, depth);
  } else {
    sub = refgraph::ReferenceGraph({canonical}, {});
  }
  json nodes = json::array();
  for (const auto& node : sub.nodes()) {
    const auto keys_it = s.records_of_canonical.find(node);
    std::set<std::string> keys;
    bool vulnerable = false;
    if (keys_it != s.records_of_canonical.end()) {
      keys = keys_it->second;
      for (const auto& k : keys) {
        auto m = s.snapshot.matches.results.find(k);
        if (m != s.snapshot.matches.results.end() && !m->second.cves.empty()) vulnerable = true;
      }
    }
    nodes.push_back({{"id", node}, {"record_keys", keys}, {"vulnerable", vulnerable}});
  }
  auto graph = json_io::graph_to_json(sub);
  return {{"center", canonical}, {"nodes", nodes}, {"edges", graph["edges"]}};
}

json fulltext(const State& s, const Request& req) {
  const auto q = param(req, "q");
  std::vector<snapshot::SearchHit> hits;
  try {
    hits = s.index.search(q);
  } catch (const snapshot::BadQuery& e) {
    fail(400, e.what());
  }
  json results = json::array();
  for (const auto& hit : hits) {
    auto entry = summary(s, record_or_404(s, hit.record_key));
    json kinds = json::array();
    for (auto k : hit.doc_kinds) kinds.push_back(std::string(to_string(k)));
    entry["doc_kinds"] = kinds;
    results.push_back(entry);
  }
  return {{"query", q}, {"count", results.size()}, {"results", results}};
}

json cve_certs(const State& s, const std::string& id) {
  auto details = cve_details(s, id);
  if (details.is_null()) fail(404, "no certificate is mapped to " + id);
  json certs = json::array();
  if (auto it = s.records_of_cve.find(id); it != s.records_of_cve.end()) {
    for (const auto& key : it->second) certs.push_back(summary(s, record_or_404(s, key)));
  }
  return {{"cve", details}, {"certs", certs}};
}

json diff_versions(SnapshotStore& store, const Request& req) {
  const auto versions = store.versions();
  if (versions.empty()) fail(503, "no snapshot loaded");
  auto to = param(req, "to");
  if (to.empty()) to = versions.back();
  auto from = param(req, "from");
  if (from.empty()) {
    auto pos = std::find(versions.begin(), versions.end(), to);
    if (pos == versions.end()) fail(404, "unknown snapshot version " + to);
    from = pos == versions.begin() ? to : *(pos - 1);
  }
  auto a = store.version(from);
  auto b = store.version(to);
  if (!a) fail(404, "unknown snapshot version " + from);
  if (!b) fail(404, "unknown snapshot version " + to);
  return {{"from", from}, {"to", to}, {"events", snapshot::events_to_json(snapshot::diff(a->snapshot, b->snapshot))}};
}

json subscribe(SnapshotStore& store, const Request& req) {
  json body;
  try {
    body = json::parse(req.body);
  } catch (const json::exception&) {
    fail(400, "body must be a JSON object {selector, sink}");
  }
  if (!body.is_object() || !body.contains("selector") || !body.at("selector").is_string()) {
    fail(400, "body must contain a string 'selector'");
  }
  const std::string sink = body.value("sink", "");
  try {
    const auto selector = body.at("selector").get<std::string>();
    const std::string id = sink.empty() ? store.subscriptions().subscribe(selector, std::unique_ptr<snapshot::Sink>{})
                                        : store.subscriptions().subscribe(selector, sink);
    return json{{"id", id}, {"selector", selector}, {"sink", sink}};
  } catch (const snapshot::BadSelector& e) {
    fail(400, e.what());
  }
}

}  // namespace

Response handle(SnapshotStore& store, const Request& req) {
  try {
    const auto parts = split_path(req.path);
    if (req.method == "POST") {
      if (parts == std::vector<std::string>{"subscriptions"}) return {201, subscribe(store, req)};
      fail(404, "no such endpoint");
    }
    if (req.method != "GET") fail(405, "method not allowed");
    if (parts == std::vector<std::string>{"diff"}) return {200, diff_versions(store, req)};
    if (parts == std::vector<std::string>{"versions"}) return {200, store.versions()};

    const auto state = store.current();
    if (!state) fail(503, "no snapshot loaded");
    const auto& s = *state;
    if (parts.size() == 1 && parts[0] == "certs") return {200, list_certs(s, req)};
    if (parts.size() == 2 && parts[0] == "certs") return {200, cert_detail(s, parts[1])};
    if (parts.size() == 3 && parts[0] == "certs" && parts[2] == "references") {
      return {200, references(s, parts[1], req)};
    }
    if (parts.size() == 2 && parts[0] == "search" && parts[1] == "fulltext") return {200, fulltext(s, req)};
    if (parts.size() == 3 && parts[0] == "cve" && parts[2] == "certs") return {200, cve_certs(s, parts[1])};
    if (parts.size() == 1 && parts[0] == "report") return {200, s.snapshot.report};
    fail(404, "no such endpoint");
  } catch (const HttpError& e) {
    return {e.status, {{"error", e.message}}};
  }
}

// --- HTTP server -------------------------------------------------------------------

struct Server::Impl {
  SnapshotStore& store;
  httplib::Server http;
  std::thread thread;

  explicit Impl(SnapshotStore& s) : store(s) {
    auto route = [this](const httplib::Request& req, httplib::Response& res) {
      Request r;
      r.method = req.method;
      r.path = req.path;
      for (const auto& [k, v] : req.params) r.params.emplace(k, v);
      r.body = req.body;
      const auto out = handle(store, r);
      res.status = out.status;
      res.set_content(out.body.dump(), "application/json");
    };
    http.Get(R"(/.*)", route);
    http.Post(R"(/.*)", route);
    http.Put(R"(/.*)", route);
    http.Delete(R"(/.*)", route);
    http.Patch(R"(/.*)", route);
  }
};

Server::Server(SnapshotStore& store) : impl_(std::make_unique<Impl>(store)) {}

Server::~Server() { stop(); }

int Server::start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->http.bind_to_any_port(host);
    if (bound < 0) throw BindError("cannot bind " + host);
  } else if (!impl_->http.bind_to_port(host, port)) {
    throw BindError("cannot bind " + host + ":" + std::to_string(port));
  }
  impl_->thread = std::thread([this] { impl_->http.listen_after_bind(); });
  impl_->http.wait_until_ready();
  return bound;
}

void Server::run(const std::string& host, int port) {
  if (!impl_->http.bind_to_port(host, port)) throw BindError("cannot bind " + host + ":" + std::to_string(port));
  impl_->http.listen_after_bind();
}

void Server::stop() {
  if (!impl_) return;
  impl_->http.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace certlab::service
