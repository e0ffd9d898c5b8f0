#include "service.hpp"

#include <charconv>
#include <cstdio>
#include <random>

#include <httplib.h>

#include "describe.hpp"
#include "error.hpp"

namespace prom {

using nlohmann::json;

SearchDatabase make_database(const std::string& name, std::vector<ImageRecord> images, const ModelBundle& model) {
  if (!model.ranker) fail(ErrorCode::State, "model file has no ranker to score database '" + name + "'");
  SearchDatabase db;
  db.name = name;
  db.scores = score_all(*model.ranker, images);
  db.images = std::move(images);
  return db;
}

// ---- sessions ----------------------------------------------------------------

namespace {

std::string random_session_id() {
  std::random_device rd;
  char buf[33];
  for (int k = 0; k < 4; ++k) std::snprintf(buf + 8 * k, 9, "%08x", static_cast<unsigned>(rd()));
  return {buf, 32};
}

}  // namespace

SessionStore::SessionStore(std::chrono::seconds ttl, std::size_t capacity, Clock clock)
    : ttl_(ttl), capacity_(capacity), clock_(clock ? std::move(clock) : Clock(std::chrono::steady_clock::now)) {
  require(capacity >= 1, "session capacity must be >= 1");
}

void SessionStore::evict_expired(std::chrono::steady_clock::time_point now) {
  for (auto it = sessions_.begin(); it != sessions_.end();) {
    if (now - it->second->last_used > ttl_)
      it = sessions_.erase(it);
    else
      ++it;
  }
}

std::pair<std::string, std::shared_ptr<SessionStore::Entry>> SessionStore::create(
    std::unique_ptr<SearchSession> session, const std::string& database) {
  std::lock_guard lock(mutex_);
  const auto now = clock_();
  evict_expired(now);
  if (sessions_.size() >= capacity_)
    fail(ErrorCode::Capacity, "session capacity of " + std::to_string(capacity_) + " reached");
  std::string id;
  do {
    id = random_session_id();
  } while (sessions_.count(id));
  auto entry = std::make_shared<Entry>();
  entry->session = std::move(session);
  entry->database = database;
  entry->last_used = now;
  sessions_.emplace(id, entry);
  return {id, entry};
}

std::shared_ptr<SessionStore::Entry> SessionStore::find(const std::string& id) {
  std::lock_guard lock(mutex_);
  const auto now = clock_();
  evict_expired(now);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) return nullptr;
  it->second->last_used = now;
  return it->second;
}

std::size_t SessionStore::size() {
  std::lock_guard lock(mutex_);
  evict_expired(clock_());
  return sessions_.size();
}

// ---- handlers ----------------------------------------------------------------

namespace {

const char* error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::Io: return "io";
    case ErrorCode::Parse: return "parse";
    case ErrorCode::NotFound: return "not_found";
    case ErrorCode::State: return "state";
    case ErrorCode::Capacity: return "capacity";
    case ErrorCode::Internal: return "internal";
  }
  return "internal";
}

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::Parse: return 400;
    case ErrorCode::NotFound: return 404;
    case ErrorCode::State: return 409;
    case ErrorCode::Capacity: return 503;
    case ErrorCode::Io:
    case ErrorCode::Internal: return 500;
  }
  return 500;
}

}  // namespace

ApiResponse error_response(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e))
    return {http_status(err->code()), {{"error", error_name(err->code())}, {"detail", err->what()}}};
  if (dynamic_cast<const json::exception*>(&e))
    return {400, {{"error", "invalid_argument"}, {"detail", e.what()}}};
  return {500, {{"error", "internal"}, {"detail", e.what()}}};
}

Service::Service(ModelBundle model, std::vector<SearchDatabase> databases, ServiceConfig config,
                 SessionStore::Clock clock)
    : model_(std::move(model)),
      databases_(std::move(databases)),
      config_(std::move(config)),
      store_(config_.session_ttl, config_.max_sessions, std::move(clock)) {
  if (!model_.prominence) fail(ErrorCode::State, "model file has no prominence model");
  require(!databases_.empty(), "service needs at least one database");
  for (const auto& db : databases_) {
    require(db.scores.size() == db.images.size(), "database '" + db.name + "' scores do not cover its images");
    require(db.scores.num_attributes() == model_.vocab.size(),
            "database '" + db.name + "' attribute count does not match the model");
  }
  require(config_.page_size >= 1, "page size must be >= 1");
}

const SearchDatabase& Service::database(const std::string& name) const {
  if (name.empty()) return databases_.front();
  for (const auto& db : databases_)
    if (db.name == name) return db;
  fail(ErrorCode::NotFound, "unknown database '" + name + "'");
}

json Service::page_json(const std::string& id, SessionStore::Entry& entry) {
  const auto& db = database(entry.database);
  json page = json::array();
  const auto shown = entry.session->show_page();
  for (std::size_t p = 0; p < shown.size(); ++p) {
    const auto& rec = db.images[shown[p]];
    page.push_back({{"id", rec.id},
                    {"asset_url", rec.asset_url ? json(*rec.asset_url) : json(nullptr)},
                    {"rank", p + 1},
                    {"satisfied", entry.session->counts()[shown[p]]}});
  }
  return {{"session_id", id},
          {"page", page},
          {"iteration", entry.session->iteration()},
          {"constraints", entry.session->constraints().size()}};
}

ApiResponse Service::create_session(const json& request) {
  try {
    if (!request.is_object()) fail(ErrorCode::InvalidArgument, "request body must be a JSON object");
    const std::string db_name = request.value("database_ref", databases_.front().name);
    const auto& db = database(db_name);
    std::size_t page_size = config_.page_size;
    if (request.contains("page_size")) {
      const auto& ps = request["page_size"];
      if (!ps.is_number_integer() || ps.get<long long>() < 1)
        fail(ErrorCode::InvalidArgument, "page_size must be a positive integer");
      page_size = ps.get<std::size_t>();
    }
    std::uint64_t seed;
    {
      std::lock_guard lock(seed_mutex_);
      seed = derive_seed(config_.seed, sessions_created_++);
    }
    auto session = std::make_unique<SearchSession>(db.scores, &*model_.prominence, SearchVariant::Prominence, seed,
                                                   page_size);
    auto [id, entry] = store_.create(std::move(session), db.name);
    std::lock_guard lock(entry->mutex);
    return {201, page_json(id, *entry)};
  } catch (const std::exception& e) {
    return error_response(e);
  }
}

ApiResponse Service::get_page(const std::string& session_id) {
  try {
    auto entry = store_.find(session_id);
    if (!entry) fail(ErrorCode::NotFound, "unknown or expired session '" + session_id + "'");
    std::lock_guard lock(entry->mutex);
    return {200, page_json(session_id, *entry)};
  } catch (const std::exception& e) {
    return error_response(e);
  }
}

ApiResponse Service::submit_feedback(const std::string& session_id, const json& request) {
  try {
    auto entry = store_.find(session_id);
    if (!entry) fail(ErrorCode::NotFound, "unknown or expired session '" + session_id + "'");
    if (!request.is_object() || !request.contains("constraints") || !request["constraints"].is_array())
      fail(ErrorCode::InvalidArgument, "body must be {\"constraints\": [...]}");
    std::lock_guard lock(entry->mutex);
    const auto& db = database(entry->database);
    SearchSession& session = *entry->session;

    // Validate everything before applying anything.
    std::vector<Constraint> constraints;
    for (const auto& c : request["constraints"]) {
      if (!c.is_object()) fail(ErrorCode::InvalidArgument, "each constraint must be an object");
      if (!c.contains("ref_id") || !c["ref_id"].is_string())
        fail(ErrorCode::InvalidArgument, "constraint needs a string ref_id");
      const std::string ref_id = c["ref_id"].get<std::string>();
      const auto ref = db.scores.find(ref_id);
      if (!ref) fail(ErrorCode::InvalidArgument, "reference '" + ref_id + "' is not in the database");
      if (!session.was_displayed(*ref))
        fail(ErrorCode::InvalidArgument, "reference '" + ref_id + "' was never displayed in this session");
      if (!c.contains("attribute_id") || !c["attribute_id"].is_number_integer())
        fail(ErrorCode::InvalidArgument, "constraint needs an integer attribute_id");
      const long long m = c["attribute_id"].get<long long>();
      if (m < 0 || static_cast<std::size_t>(m) >= model_.vocab.size())
        fail(ErrorCode::InvalidArgument, "attribute_id " + std::to_string(m) + " out of range");
      const std::string pol = c.value("polarity", std::string{});
      Polarity polarity;
      if (pol == "more")
        polarity = Polarity::More;
      else if (pol == "less")
        polarity = Polarity::Less;
      else
        fail(ErrorCode::InvalidArgument, "polarity must be \"more\" or \"less\"");
      constraints.push_back({*ref, static_cast<AttributeId>(m), polarity});
    }
    session.add_feedback(constraints);
    return {200, page_json(session_id, *entry)};
  } catch (const std::exception& e) {
    return error_response(e);
  }
}

ApiResponse Service::explain(const std::string& id_i, const std::string& id_j, const std::string& k_param,
                             const std::string& database_name) {
  try {
    std::size_t k = 3;
    if (!k_param.empty()) {
      long long v = 0;
      const auto [ptr, ec] = std::from_chars(k_param.data(), k_param.data() + k_param.size(), v);
      if (ec != std::errc{} || ptr != k_param.data() + k_param.size() || v < 1)
        fail(ErrorCode::InvalidArgument, "k must be a positive integer");
      k = static_cast<std::size_t>(v);
    }
    const auto& db = database(database_name);
    const auto i = db.scores.find(id_i);
    if (!i) fail(ErrorCode::NotFound, "unknown image '" + id_i + "'");
    const auto j = db.scores.find(id_j);
    if (!j) fail(ErrorCode::NotFound, "unknown image '" + id_j + "'");
    return {200, explanation_json(*model_.prominence, model_.vocab, db.scores.row(*i), db.scores.row(*j), k, id_i,
                                  id_j)};
  } catch (const std::exception& e) {
    return error_response(e);
  }
}

ApiResponse Service::meta() const {
  json dbs = json::array();
  for (const auto& db : databases_) dbs.push_back({{"name", db.name}, {"size", db.images.size()}});
  json vocab = json::array();
  for (const auto& n : model_.vocab.names) vocab.push_back(n);
  return {200,
          {{"vocab", vocab},
           {"M", model_.vocab.size()},
           {"database_size", databases_.front().images.size()},
           {"databases", dbs},
           {"page_size", config_.page_size},
           {"model_version", kModelFileVersion}}};
}

// ---- HTTP --------------------------------------------------------------------

struct HttpServer::Impl {
  Service& service;
  httplib::Server server;

  explicit Impl(Service& s) : service(s) {}
};

namespace {

void send(httplib::Response& res, const ApiResponse& r) {
  res.status = r.status;
  res.set_content(r.body.dump(), "application/json");
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    return json::parse(req.body);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::InvalidArgument, std::string("request body is not valid JSON: ") + e.what());
  }
}

std::string query(const httplib::Request& req, const char* key) {
  return req.has_param(key) ? req.get_param_value(key) : std::string{};
}

}  // namespace

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>(service)) {
  auto& srv = impl_->server;
  Service& svc = impl_->service;

  srv.Post("/api/sessions", [&svc](const httplib::Request& req, httplib::Response& res) {
    try {
      send(res, svc.create_session(parse_body(req)));
    } catch (const std::exception& e) {
      send(res, error_response(e));
    }
  });
  srv.Get("/api/sessions/:id/page", [&svc](const httplib::Request& req, httplib::Response& res) {
    send(res, svc.get_page(req.path_params.at("id")));
  });
  srv.Post("/api/sessions/:id/feedback", [&svc](const httplib::Request& req, httplib::Response& res) {
    try {
      send(res, svc.submit_feedback(req.path_params.at("id"), parse_body(req)));
    } catch (const std::exception& e) {
      send(res, error_response(e));
    }
  });
  srv.Get("/api/pairs/:i/:j/explain", [&svc](const httplib::Request& req, httplib::Response& res) {
    send(res, svc.explain(req.path_params.at("i"), req.path_params.at("j"), query(req, "k"), query(req, "database")));
  });
  srv.Get("/api/meta", [&svc](const httplib::Request&, httplib::Response& res) { send(res, svc.meta()); });

  srv.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      send(res, error_response(e));
    } catch (...) {
      send(res, {500, {{"error", "internal"}, {"detail", "unknown exception"}}});
    }
  });
  srv.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
    if (!res.body.empty()) return;
    json body{{"error", res.status == 404 ? "not_found" : "http_error"},
              {"detail", "no handler for " + req.method + " " + req.path}};
    res.set_content(body.dump(), "application/json");
  });

  const auto& assets = svc.config().asset_dir;
  if (!assets.empty() && !srv.set_mount_point("/", assets))
    fail(ErrorCode::Io, "asset directory '" + assets + "' does not exist");
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  auto& srv = impl_->server;
  if (port == 0) {
    const int bound = srv.bind_to_any_port(host);
    if (bound < 0) fail(ErrorCode::Io, "cannot bind " + host);
    return bound;
  }
  if (!srv.bind_to_port(host, port)) fail(ErrorCode::Io, "cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

void HttpServer::wait_until_ready() { impl_->server.wait_until_ready(); }

}  // namespace prom
