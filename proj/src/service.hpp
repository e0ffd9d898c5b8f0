#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "model_io.hpp"
#include "search.hpp"

namespace prom {

// A searchable image collection: records for display plus their scores.
struct SearchDatabase {
  std::string name;
  std::vector<ImageRecord> images;  // rows aligned with `scores`
  ScoreMatrix scores;
};

// Scores `images` with the bundle's ranker.
SearchDatabase make_database(const std::string& name, std::vector<ImageRecord> images, const ModelBundle& model);

struct ServiceConfig {
  std::size_t page_size = 16;
  std::chrono::seconds session_ttl{3600};
  std::size_t max_sessions = 1024;
  std::uint64_t seed = 0;
  std::string asset_dir;  // served at "/" when non-empty
};

// Live sessions keyed by 128-bit random hex ids. Sessions idle longer than the
// TTL are evicted lazily on every store access.
class SessionStore {
 public:
  using Clock = std::function<std::chrono::steady_clock::time_point()>;

  struct Entry {
    std::mutex mutex;  // serializes requests on one session
    std::unique_ptr<SearchSession> session;
    std::string database;
    std::chrono::steady_clock::time_point last_used;
  };

  SessionStore(std::chrono::seconds ttl, std::size_t capacity, Clock clock = {});

  // Fails with a capacity error when full after eviction.
  std::pair<std::string, std::shared_ptr<Entry>> create(std::unique_ptr<SearchSession> session,
                                                        const std::string& database);
  // Null when the id is unknown or expired; refreshes the idle timer.
  std::shared_ptr<Entry> find(const std::string& id);
  std::size_t size();

 private:
  void evict_expired(std::chrono::steady_clock::time_point now);

  std::chrono::seconds ttl_;
  std::size_t capacity_;
  Clock clock_;
  std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
};

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
};

// Request handlers, independent of the HTTP transport. Model and databases are
// shared read-only; per-session state lives in the store.
class Service {
 public:
  Service(ModelBundle model, std::vector<SearchDatabase> databases, ServiceConfig config,
          SessionStore::Clock clock = {});

  ApiResponse create_session(const nlohmann::json& request);
  ApiResponse get_page(const std::string& session_id);
  ApiResponse submit_feedback(const std::string& session_id, const nlohmann::json& request);
  // `k_param` and `database` are raw query values; empty means default.
  ApiResponse explain(const std::string& id_i, const std::string& id_j, const std::string& k_param,
                      const std::string& database = "");
  ApiResponse meta() const;

  const ServiceConfig& config() const { return config_; }
  SessionStore& store() { return store_; }

 private:
  const SearchDatabase& database(const std::string& name) const;
  nlohmann::json page_json(const std::string& id, SessionStore::Entry& entry);

  ModelBundle model_;
  std::vector<SearchDatabase> databases_;
  ServiceConfig config_;
  SessionStore store_;
  std::mutex seed_mutex_;
  std::uint64_t sessions_created_ = 0;
};

// Maps an exception to {error, detail} with a matching status.
ApiResponse error_response(const std::exception& e);

// HTTP transport over a Service.
class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Binds and returns the bound port; port 0 picks a free one.
  int bind(const std::string& host, int port);
  // Blocks until stop() is called.
  void listen();
  void stop();
  // Blocks until the listener accepts connections.
  void wait_until_ready();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace prom
