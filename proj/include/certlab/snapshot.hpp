#pragma once

#include <json.hpp>

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "certlab/dataset.hpp"

namespace certlab::snapshot {

inline constexpr int kSchemaVersion = 1;

class SchemaMismatch : public SchemaError {
 public:
  using SchemaError::SchemaError;
};

/// One immutable capture of the processed dataset.
struct Snapshot {
  int schema_version = kSchemaVersion;
  /// ISO-8601 UTC timestamp; doubles as the version id.
  std::string created;
  /// Directory holding the artifact texts, relative to the snapshot file
  /// unless absolute.
  std::string artifacts_root;
  std::vector<ingest::CertRecord> records;
  FeatureMap features;
  IdMap ids;
  refgraph::ReferenceGraph graph;
  MatchSet matches;
  nlohmann::json report = nlohmann::json::object();

  /// Date part of `created`.
  Date snapshot_date() const;
  const ingest::CertRecord* find(const std::string& record_key) const;
};

/// "YYYY-MM-DDTHH:MM:SSZ" for the current time.
std::string current_timestamp();

nlohmann::json to_json(const Snapshot& snapshot);
/// Checks the schema version and that every referenced record_key and graph
/// node resolves.
Snapshot snapshot_from_json(const nlohmann::json& j);

Snapshot load_snapshot(const std::string& path);
void save_snapshot(const std::string& path, const Snapshot& snapshot);
/// artifacts_root resolved against the directory of `snapshot_path`.
std::string resolve_artifacts_root(const std::string& snapshot_path, const Snapshot& snapshot);

// --- diff ---------------------------------------------------------------------

enum class EventKind {
  new_cert,
  new_cve,
  removed_cve,
  id_changed,
  reference_added,
  reference_removed,
  status_changed,
};

std::string_view to_string(EventKind kind);
EventKind event_kind_from_string(std::string_view text);

struct DiffEvent {
  std::string record_key;
  EventKind kind = EventKind::new_cert;
  /// CVE id, referenced canonical ID, "old -> new", or the new title.
  std::string detail;

  friend auto operator<=>(const DiffEvent&, const DiffEvent&) = default;
};

/// Sorted by (record_key, kind, detail). Records that disappear produce
/// removal events for their CVEs and references.
std::vector<DiffEvent> diff(const Snapshot& old_snapshot, const Snapshot& new_snapshot);

nlohmann::json events_to_json(const std::vector<DiffEvent>& events);
std::vector<DiffEvent> events_from_json(const nlohmann::json& j);

/// The per-record facts that diff events describe.
struct ReplayState {
  std::map<std::string, std::set<std::string>> cves;
  /// record_key -> canonical IDs its artifacts reference
  std::map<std::string, std::set<std::string>> references;

  friend bool operator==(const ReplayState&, const ReplayState&) = default;
};

ReplayState replay_state(const Snapshot& snapshot);
ReplayState apply_events(ReplayState state, const std::vector<DiffEvent>& events);

// --- full-text search -------------------------------------------------------------

class BadQuery : public Error {
 public:
  using Error::Error;
};

/// Whitespace-separated terms; `*` matches any run of characters and `?`
/// exactly one, case-insensitively. A multi-term query matches consecutive
/// whitespace tokens of a document.
class WildcardQuery {
 public:
  explicit WildcardQuery(std::string_view query);
  bool matches(const std::vector<std::string>& lowercase_tokens) const;
  std::size_t term_count() const { return terms_.size(); }

 private:
  struct Term;
  std::vector<std::shared_ptr<const Term>> terms_;
};

struct SearchHit {
  std::string record_key;
  std::set<DocKind> doc_kinds;

  friend bool operator==(const SearchHit&, const SearchHit&) = default;
};

/// Tokenized artifact texts, scanned linearly per query.
class FullTextIndex {
 public:
  FullTextIndex() = default;
  explicit FullTextIndex(const refgraph::ArtifactTexts& texts);

  /// Sorted by record_key.
  std::vector<SearchHit> search(std::string_view query) const;

 private:
  struct Doc {
    std::string record_key;
    DocKind kind;
    std::vector<std::string> tokens;
  };
  std::vector<Doc> docs_;
};

// --- subscriptions ----------------------------------------------------------------

class BadSelector : public Error {
 public:
  using Error::Error;
};

/// `key=value` pairs joined by '&'; keys record_key, kind and cve. All given
/// keys must match.
struct Selector {
  std::optional<std::string> record_key;
  std::optional<EventKind> kind;
  std::optional<std::string> cve;

  static Selector parse(std::string_view text);
  bool matches(const DiffEvent& event) const;
};

class Sink {
 public:
  virtual ~Sink() = default;
  virtual void deliver(const std::string& subscription_id, const DiffEvent& event) = 0;
};

/// `log:<path>` appends JSON lines; `webhook:http://host[:port]/path` POSTs
/// each event as JSON.
std::unique_ptr<Sink> make_sink(std::string_view spec);

struct Delivery {
  std::string subscription_id;
  DiffEvent event;
};

class SubscriptionRegistry {
 public:
  /// Throws BadSelector for malformed selectors or sink specs.
  std::string subscribe(std::string_view selector, std::string_view sink_spec);
  std::string subscribe(std::string_view selector, std::unique_ptr<Sink> sink);

  /// Delivers each event to every matching subscription; returns the number
  /// of successful deliveries. Sink failures are counted, not thrown.
  std::size_t notify(const std::vector<DiffEvent>& events);

  std::vector<Delivery> deliveries(const std::string& subscription_id) const;
  std::size_t size() const;
  std::size_t failed_deliveries() const;

 private:
  struct Subscription {
    std::string id;
    Selector selector;
    std::unique_ptr<Sink> sink;
    std::vector<DiffEvent> delivered;
  };
  mutable std::mutex mutex_;
  std::vector<Subscription> subscriptions_;
  std::size_t next_id_ = 1;
  std::size_t failed_ = 0;
};

}  // namespace certlab::snapshot
