#pragma once

#include <json.hpp>

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "certlab/snapshot.hpp"

namespace certlab::service {

class BindError : public Error {
 public:
  using Error::Error;
};

/// A loaded snapshot plus the lookup tables the endpoints use. Immutable.
struct State {
  snapshot::Snapshot snapshot;
  snapshot::FullTextIndex index;
  std::map<std::string, const ingest::CertRecord*> by_key;
  std::map<std::string, std::set<std::string>> records_of_canonical;
  std::map<std::string, std::set<std::string>> records_of_cve;
};

std::shared_ptr<const State> make_state(snapshot::Snapshot snapshot, const refgraph::ArtifactTexts& texts);

/// Snapshot history with an atomically replaceable current version.
class SnapshotStore {
 public:
  /// Makes `snapshot` current, notifies subscribers of the diff against the
  /// previous current version and returns that diff. Throws Error when a
  /// snapshot with the same `created` id is already stored.
  std::vector<snapshot::DiffEvent> publish(snapshot::Snapshot snapshot, const refgraph::ArtifactTexts& texts);

  std::shared_ptr<const State> current() const;
  std::shared_ptr<const State> version(const std::string& created) const;
  /// Oldest first.
  std::vector<std::string> versions() const;

  snapshot::SubscriptionRegistry& subscriptions() { return subscriptions_; }

 private:
  mutable std::mutex mutex_;
  std::shared_ptr<const State> current_;
  std::vector<std::shared_ptr<const State>> history_;
  snapshot::SubscriptionRegistry subscriptions_;
};

struct Request {
  std::string method = "GET";
  std::string path;
  std::map<std::string, std::string> params;
  std::string body;
};

struct Response {
  int status = 200;
  nlohmann::json body;
};

/// Routes one API request against the store's current snapshot.
Response handle(SnapshotStore& store, const Request& request);

/// HTTP front end for handle().
class Server {
 public:
  explicit Server(SnapshotStore& store);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds and starts serving on a background thread; port 0 picks a free
  /// port. Returns the bound port. Throws BindError.
  int start(const std::string& host, int port);
  /// Blocks serving on the calling thread.
  void run(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace certlab::service
