#include <doctest.h>

#include <httplib.h>

#include <set>
#include <thread>

#include "describe.hpp"
#include "error.hpp"
#include "fixtures.hpp"
#include "service.hpp"
#include "support.hpp"

using namespace prom;
using nlohmann::json;

namespace {

// Minimal structural schema check: {"type", "required", "properties", "items"}.
bool matches(const json& value, const json& schema, std::string& why, const std::string& at = "$") {
  const std::string type = schema.value("type", "");
  auto bad = [&](const std::string& msg) {
    why = at + ": " + msg;
    return false;
  };
  if (type == "object") {
    if (!value.is_object()) return bad("expected object");
    const json required = schema.value("required", json::array());
    const json properties = schema.value("properties", json::object());
    for (const auto& key : required)
      if (!value.contains(key.get<std::string>())) return bad("missing " + key.get<std::string>());
    for (const auto& [key, sub] : properties.items())
      if (value.contains(key) && !matches(value[key], sub, why, at + "." + key)) return false;
  } else if (type == "array") {
    if (!value.is_array()) return bad("expected array");
    if (schema.contains("items"))
      for (std::size_t k = 0; k < value.size(); ++k)
        if (!matches(value[k], schema["items"], why, at + "[" + std::to_string(k) + "]")) return false;
  } else if (type == "string") {
    if (!value.is_string()) return bad("expected string");
  } else if (type == "integer") {
    if (!value.is_number_integer()) return bad("expected integer");
  } else if (type == "number") {
    if (!value.is_number()) return bad("expected number");
  } else if (type == "string|null") {
    if (!value.is_string() && !value.is_null()) return bad("expected string or null");
  }
  return true;
}

#define CHECK_SCHEMA(value, schema)            \
  do {                                         \
    std::string why_;                          \
    const bool ok_ = matches(value, schema, why_); \
    CHECK_MESSAGE(ok_, why_);                  \
  } while (0)

const json kPageSchema = json::parse(R"({
  "type": "object",
  "required": ["session_id", "page", "iteration"],
  "properties": {
    "session_id": {"type": "string"},
    "iteration": {"type": "integer"},
    "page": {"type": "array", "items": {
      "type": "object", "required": ["id", "asset_url"],
      "properties": {"id": {"type": "string"}, "asset_url": {"type": "string|null"},
                     "rank": {"type": "integer"}, "satisfied": {"type": "integer"}}}}
  }
})");

const json kExplainSchema = json::parse(R"({
  "type": "object",
  "required": ["statements", "text", "confidences"],
  "properties": {
    "text": {"type": "string"},
    "statements": {"type": "array", "items": {
      "type": "object", "required": ["attribute_id", "attribute", "polarity", "confidence"],
      "properties": {"attribute_id": {"type": "integer"}, "attribute": {"type": "string"},
                     "polarity": {"type": "string"}, "confidence": {"type": "number"}}}},
    "confidences": {"type": "array", "items": {
      "type": "object", "required": ["attribute_id", "confidence"],
      "properties": {"attribute_id": {"type": "integer"}, "confidence": {"type": "number"}}}}
  }
})");

const json kMetaSchema = json::parse(R"({
  "type": "object",
  "required": ["vocab", "M", "database_size", "model_version"],
  "properties": {"vocab": {"type": "array", "items": {"type": "string"}}, "M": {"type": "integer"},
                 "database_size": {"type": "integer"}, "model_version": {"type": "integer"}}
})");

const json kErrorSchema = json::parse(R"({
  "type": "object", "required": ["error", "detail"],
  "properties": {"error": {"type": "string"}, "detail": {"type": "string"}}
})");

struct World {
  testing::Trained trained = testing::train_small();

  std::vector<SearchDatabase> databases() const {
    auto images = trained.data.dataset.images;
    for (auto& img : images) img.asset_url = "/img/" + img.id + ".jpg";
    std::vector<SearchDatabase> dbs;
    dbs.push_back(make_database("main", images, trained.bundle));
    return dbs;
  }
};

const World& world() {
  static const World w;
  return w;
}

// Manually advanced clock for TTL tests.
struct FakeClock {
  std::shared_ptr<std::chrono::steady_clock::time_point> now =
      std::make_shared<std::chrono::steady_clock::time_point>();
  SessionStore::Clock fn() const {
    auto n = now;
    return [n] { return *n; };
  }
  void advance(std::chrono::seconds s) const { *now += s; }
};

Service make_service(ServiceConfig cfg = {}, SessionStore::Clock clock = {}) {
  return Service(world().trained.bundle, world().databases(), cfg, std::move(clock));
}

}  // namespace

TEST_CASE("session creation returns a first page") {
  auto svc = make_service();
  const auto r = svc.create_session(json::object());
  CHECK(r.status == 201);
  CHECK_SCHEMA(r.body, kPageSchema);
  CHECK(r.body["page"].size() == 16);
  CHECK(r.body["iteration"] == 0);
  CHECK(r.body["page"][0]["asset_url"].get<std::string>().rfind("/img/", 0) == 0);
  CHECK(r.body["session_id"].get<std::string>().size() == 32);

  const auto other = svc.create_session({{"page_size", 5}});
  CHECK(other.body["page"].size() == 5);
  CHECK(other.body["session_id"] != r.body["session_id"]);

  const auto missing = svc.create_session({{"database_ref", "nope"}});
  CHECK(missing.status == 404);
  CHECK_SCHEMA(missing.body, kErrorSchema);
  CHECK(svc.create_session({{"page_size", 0}}).status == 400);
  CHECK(svc.create_session(json::array()).status == 400);
}

TEST_CASE("page reads are idempotent") {
  auto svc = make_service();
  const auto id = svc.create_session(json::object()).body["session_id"].get<std::string>();
  const auto a = svc.get_page(id);
  const auto b = svc.get_page(id);
  CHECK(a.status == 200);
  CHECK(a.body == b.body);
  CHECK(svc.get_page("0123").status == 404);
}

TEST_CASE("feedback validation and grouping") {
  auto svc = make_service();
  const auto first = svc.create_session(json::object()).body;
  const auto id = first["session_id"].get<std::string>();
  const std::string shown = first["page"][3]["id"];

  SUBCASE("empty feedback only advances the iteration") {
    const auto r = svc.submit_feedback(id, {{"constraints", json::array()}});
    CHECK(r.status == 200);
    CHECK(r.body["iteration"] == 1);
    CHECK(r.body["page"] == first["page"]);
  }

  SUBCASE("one constraint puts its satisfiers on top") {
    // The shown image lowest on attribute 2 leaves plenty of satisfiers.
    const auto& s = world().trained.scores;
    std::string low = shown;
    for (const auto& e : first["page"])
      if (s.row(*s.find(e["id"]))[2] < s.row(*s.find(low))[2]) low = e["id"];
    const auto r = svc.submit_feedback(
        id, {{"constraints", {{{"ref_id", low}, {"attribute_id", 2}, {"polarity", "more"}}}}});
    REQUIRE(r.status == 200);
    CHECK_SCHEMA(r.body, kPageSchema);
    CHECK(r.body["constraints"] == 1);
    for (const auto& entry : r.body["page"]) CHECK(entry["satisfied"] == 1);
  }

  SUBCASE("references must have been displayed") {
    std::set<std::string> on_page;
    for (const auto& e : first["page"]) on_page.insert(e["id"]);
    std::string hidden;
    for (const auto& img : world().trained.data.dataset.images)
      if (!on_page.count(img.id)) hidden = img.id;
    const auto r = svc.submit_feedback(
        id, {{"constraints", {{{"ref_id", hidden}, {"attribute_id", 0}, {"polarity", "less"}}}}});
    CHECK(r.status == 400);
    CHECK(r.body["detail"].get<std::string>().find("never displayed") != std::string::npos);
  }

  SUBCASE("bad attribute and polarity are rejected atomically") {
    auto bad = [&](json c) {
      return svc.submit_feedback(
          id, {{"constraints", {{{"ref_id", shown}, {"attribute_id", 1}, {"polarity", "more"}}, std::move(c)}}});
    };
    CHECK(bad({{"ref_id", shown}, {"attribute_id", 10}, {"polarity", "more"}}).status == 400);
    CHECK(bad({{"ref_id", shown}, {"attribute_id", -1}, {"polarity", "more"}}).status == 400);
    CHECK(bad({{"ref_id", shown}, {"attribute_id", 1}, {"polarity", "equal"}}).status == 400);
    CHECK(bad({{"ref_id", "ghost"}, {"attribute_id", 1}, {"polarity", "more"}}).status == 400);
    CHECK(svc.get_page(id).body["constraints"] == 0);
    CHECK(svc.get_page(id).body["iteration"] == 0);
  }

  CHECK(svc.submit_feedback("missing", {{"constraints", json::array()}}).status == 404);
  CHECK(svc.submit_feedback(id, json::object()).status == 400);
}

TEST_CASE("sessions are isolated") {
  auto svc = make_service();
  const auto a = svc.create_session(json::object()).body;
  const auto b = svc.create_session(json::object()).body;
  const auto b_before = svc.get_page(b["session_id"]).body;
  svc.submit_feedback(a["session_id"],
                      {{"constraints", {{{"ref_id", a["page"][0]["id"]}, {"attribute_id", 4}, {"polarity", "less"}}}}});
  CHECK(svc.get_page(b["session_id"]).body == b_before);
}

TEST_CASE("explanations") {
  auto svc = make_service();
  const auto& ids = world().trained.scores.ids();
  const auto r = svc.explain(ids[0], ids[1], "");
  REQUIRE(r.status == 200);
  CHECK_SCHEMA(r.body, kExplainSchema);
  CHECK(r.body["statements"].size() == 3);
  CHECK(r.body["confidences"].size() == 10);

  // Same code path as the CLI describe command.
  const auto& s = world().trained.scores;
  const auto direct = explanation_json(*world().trained.bundle.prominence, world().trained.bundle.vocab, s.row(0),
                                       s.row(1), 3, ids[0], ids[1]);
  CHECK(r.body.dump() == direct.dump());

  const auto full = svc.explain(ids[0], ids[1], "10");
  CHECK(full.body["statements"].size() == 10);

  const auto same = svc.explain(ids[2], ids[2], "2");
  for (const auto& st : same.body["statements"]) CHECK(st["polarity"] == "equal");
  CHECK(same.body["text"].get<std::string>().find("similarly") != std::string::npos);

  const auto swapped = svc.explain(ids[1], ids[0], "");
  for (std::size_t q = 0; q < 3; ++q) {
    CHECK(swapped.body["statements"][q]["attribute_id"] == r.body["statements"][q]["attribute_id"]);
    CHECK(swapped.body["statements"][q]["confidence"] == r.body["statements"][q]["confidence"]);
    CHECK(swapped.body["statements"][q]["polarity"] != r.body["statements"][q]["polarity"]);
  }

  CHECK(svc.explain("ghost", ids[0], "").status == 404);
  CHECK(svc.explain(ids[0], ids[1], "zero").status == 400);
  CHECK(svc.explain(ids[0], ids[1], "0").status == 400);
}

TEST_CASE("meta") {
  auto svc = make_service();
  const auto r = svc.meta();
  CHECK_SCHEMA(r.body, kMetaSchema);
  CHECK(r.body["M"] == 10);
  CHECK(r.body["database_size"] == 120);
  CHECK(r.body["model_version"] == 1);
}

TEST_CASE("sessions expire after the TTL") {
  FakeClock clock;
  ServiceConfig cfg;
  cfg.session_ttl = std::chrono::seconds(60);
  auto svc = make_service(cfg, clock.fn());
  const auto id = svc.create_session(json::object()).body["session_id"].get<std::string>();
  clock.advance(std::chrono::seconds(59));
  CHECK(svc.get_page(id).status == 200);  // refreshes the idle timer
  clock.advance(std::chrono::seconds(59));
  CHECK(svc.get_page(id).status == 200);
  clock.advance(std::chrono::seconds(61));
  CHECK(svc.get_page(id).status == 404);
  CHECK(svc.store().size() == 0);
}

TEST_CASE("capacity limit answers 503 until sessions expire") {
  FakeClock clock;
  ServiceConfig cfg;
  cfg.max_sessions = 2;
  cfg.session_ttl = std::chrono::seconds(10);
  auto svc = make_service(cfg, clock.fn());
  CHECK(svc.create_session(json::object()).status == 201);
  CHECK(svc.create_session(json::object()).status == 201);
  const auto full = svc.create_session(json::object());
  CHECK(full.status == 503);
  CHECK(full.body["error"] == "capacity");
  clock.advance(std::chrono::seconds(11));
  CHECK(svc.create_session(json::object()).status == 201);
}

TEST_CASE("error mapping") {
  CHECK(error_response(Error(ErrorCode::InvalidArgument, "x")).status == 400);
  CHECK(error_response(Error(ErrorCode::Parse, "x")).status == 400);
  CHECK(error_response(Error(ErrorCode::NotFound, "x")).status == 404);
  CHECK(error_response(Error(ErrorCode::State, "x")).status == 409);
  CHECK(error_response(Error(ErrorCode::Capacity, "x")).status == 503);
  CHECK(error_response(Error(ErrorCode::Io, "x")).status == 500);
  CHECK(error_response(std::runtime_error("boom")).status == 500);
}

TEST_CASE("live HTTP round trip") {
  testing::TempDir assets("assets");
  assets.write("index.html", "<html>ok</html>");
  ServiceConfig cfg;
  cfg.asset_dir = assets.str();
  auto svc = make_service(cfg);
  HttpServer server(svc);
  const int port = server.bind("127.0.0.1", 0);
  REQUIRE(port > 0);
  std::thread listener([&] { server.listen(); });
  server.wait_until_ready();

  httplib::Client client("127.0.0.1", port);
  auto post = [&](const std::string& path, const json& body) {
    auto res = client.Post(path, body.dump(), "application/json");
    REQUIRE(res);
    return std::make_pair(res->status, json::parse(res->body));
  };
  auto get = [&](const std::string& path) {
    auto res = client.Get(path);
    REQUIRE(res);
    return std::make_pair(res->status, json::parse(res->body));
  };

  const auto [created_status, created] = post("/api/sessions", json::object());
  CHECK(created_status == 201);
  CHECK_SCHEMA(created, kPageSchema);
  const std::string id = created["session_id"];

  const auto [page_status, page] = get("/api/sessions/" + id + "/page");
  CHECK(page_status == 200);
  CHECK(page == created);

  for (int round = 0; round < 2; ++round) {
    const auto [status, next] =
        post("/api/sessions/" + id + "/feedback",
             {{"constraints", {{{"ref_id", created["page"][round]["id"]}, {"attribute_id", round}, {"polarity", "more"}}}}});
    CHECK(status == 200);
    CHECK_SCHEMA(next, kPageSchema);
    CHECK(next["iteration"] == round + 1);
  }

  const std::string a = created["page"][0]["id"], b = created["page"][1]["id"];
  const auto [explain_status, explained] = get("/api/pairs/" + a + "/" + b + "/explain?k=3");
  CHECK(explain_status == 200);
  CHECK_SCHEMA(explained, kExplainSchema);
  CHECK(explained.dump() == svc.explain(a, b, "3").body.dump());

  const auto [meta_status, meta] = get("/api/meta");
  CHECK(meta_status == 200);
  CHECK_SCHEMA(meta, kMetaSchema);

  const auto [missing_status, missing] = get("/api/sessions/nope/page");
  CHECK(missing_status == 404);
  CHECK_SCHEMA(missing, kErrorSchema);

  auto garbage = client.Post("/api/sessions", "{oops", "application/json");
  REQUIRE(garbage);
  CHECK(garbage->status == 400);
  CHECK_SCHEMA(json::parse(garbage->body), kErrorSchema);

  const auto [unknown_status, unknown] = get("/api/nothing");
  CHECK(unknown_status == 404);
  CHECK_SCHEMA(unknown, kErrorSchema);

  auto index = client.Get("/index.html");
  REQUIRE(index);
  CHECK(index->status == 200);
  CHECK(index->body == "<html>ok</html>");

  server.stop();
  listener.join();
}

TEST_CASE("concurrent feedback on distinct sessions") {
  auto svc = make_service();
  std::vector<std::string> ids;
  std::vector<json> pages;
  for (int k = 0; k < 8; ++k) {
    auto r = svc.create_session(json::object());
    ids.push_back(r.body["session_id"]);
    pages.push_back(r.body["page"]);
  }
  std::vector<std::thread> threads;
  std::vector<int> ok(8, 0);
  for (int k = 0; k < 8; ++k)
    threads.emplace_back([&, k] {
      for (int round = 0; round < 5; ++round) {
        const auto r = svc.submit_feedback(
            ids[k], {{"constraints", {{{"ref_id", pages[k][round]["id"]}, {"attribute_id", (k + round) % 10},
                                       {"polarity", round % 2 ? "more" : "less"}}}}});
        ok[k] += r.status == 200;
      }
    });
  for (auto& t : threads) t.join();
  for (int k = 0; k < 8; ++k) {
    CHECK(ok[k] == 5);
    CHECK(svc.get_page(ids[k]).body["iteration"] == 5);
  }
}
