#include <doctest.h>

#include <json.hpp>

#include <cstring>
#include <memory>
#include <string>

#include <prominence/prominence.h>

#include "tempdir.hpp"

using nlohmann::json;

namespace {

// Takes ownership of a library-allocated string.
std::string take(char* s) {
  REQUIRE(s != nullptr);
  std::string out(s);
  pd_string_free(s);
  return out;
}

struct Handles {
  pd_dataset* dataset = nullptr;
  pd_model* model = nullptr;
  pd_scores* scores = nullptr;
  ~Handles() {
    pd_scores_free(scores);
    pd_model_free(model);
    pd_dataset_free(dataset);
  }
};

const char* kSpec = R"({"n_images": 80, "n_ordered_pairs": 800, "n_labeled_pairs": 300, "seed": 11})";

}  // namespace

TEST_CASE("version and status names") {
  CHECK(std::strlen(pd_version()) > 0);
  CHECK(std::string(pd_status_name(PD_OK)) == "ok");
  CHECK(std::string(pd_status_name(PD_ERR_CAPACITY)) == "capacity");
}

TEST_CASE("full pipeline through the C interface") {
  testing::TempDir dir("capi");
  const std::string data = dir.file("data");
  REQUIRE(pd_synthesize(kSpec, data.c_str()) == PD_OK);

  Handles h;
  REQUIRE(pd_dataset_load(data.c_str(), nullptr, &h.dataset) == PD_OK);
  char* info = nullptr;
  REQUIRE(pd_dataset_info(h.dataset, &info) == PD_OK);
  const json ds = json::parse(take(info));
  CHECK(ds["M"] == 10);
  CHECK(ds["images"] == 80);
  CHECK(ds["synthetic"] == true);

  REQUIRE(pd_train_ranker(h.dataset, R"({"epochs": 20, "seed": 1})", &h.model) == PD_OK);
  REQUIRE(pd_score(h.model, h.dataset, &h.scores) == PD_OK);
  REQUIRE(pd_train_prominence(h.model, h.dataset, h.scores, R"({"seed": 2})") == PD_OK);

  const std::string path = dir.file("model.json");
  REQUIRE(pd_model_save(h.model, path.c_str(), R"({"seed": 1})") == PD_OK);
  pd_model* loaded = nullptr;
  REQUIRE(pd_model_load(path.c_str(), &loaded) == PD_OK);
  std::unique_ptr<pd_model, decltype(&pd_model_free)> guard(loaded, pd_model_free);

  char* minfo = nullptr;
  REQUIRE(pd_model_info(loaded, &minfo) == PD_OK);
  const json mi = json::parse(take(minfo));
  CHECK(mi["ranker"] == true);
  CHECK(mi["prominence"] == true);

  for (const char* method : {"model", "widest", "single", "prior"}) {
    char* a = nullptr;
    char* b = nullptr;
    REQUIRE(pd_predict(h.model, h.scores, "img00001", "img00002", method, &a) == PD_OK);
    REQUIRE(pd_predict(loaded, h.scores, "img00001", "img00002", method, &b) == PD_OK);
    const json ja = json::parse(take(a));
    CHECK(ja == json::parse(take(b)));
    CHECK(ja["ranked"].size() == 10);
  }

  char* text = nullptr;
  REQUIRE(pd_describe(loaded, h.scores, "img00001", "img00002", 3, &text) == PD_OK);
  const json d = json::parse(take(text));
  CHECK(d["statements"].size() == 3);
  CHECK(d["confidences"].size() == 10);
  CHECK(d["text"].get<std::string>().rfind("The left image ", 0) == 0);

  char* eval = nullptr;
  REQUIRE(pd_evaluate(h.dataset, R"({"folds": 3, "max_k": 3, "ranker": {"epochs": 10}})", &eval) == PD_OK);
  const json e = json::parse(take(eval));
  CHECK(e["summary"]["n_folds"] == 3);
  CHECK(e["summary"]["methods"]["model"]["accuracy"].size() == 3);
  CHECK(e["summary"]["methods"]["model"].contains("oracle_top1"));
  CHECK(e["gnuplot"].get<std::string>().rfind("# k model widest single prior", 0) == 0);

  char* search = nullptr;
  REQUIRE(pd_search_experiment(loaded, h.dataset,
                               R"({"database_size": 300, "targets": 10, "iterations": 2, "seed": 4})",
                               &search) == PD_OK);
  const json s = json::parse(take(search));
  CHECK(s["summary"]["iterations"].size() == 3);
  CHECK(s["summary"]["grouping_violations"]["prominence"] == 0);

  const std::string csv = dir.file("scores.csv");
  REQUIRE(pd_scores_save(h.scores, csv.c_str()) == PD_OK);
  std::uint64_t hash_a = 0, hash_b = 0;
  REQUIRE(pd_hash_file(csv.c_str(), &hash_a) == PD_OK);
  REQUIRE(pd_scores_save(h.scores, dir.file("again.csv").c_str()) == PD_OK);
  REQUIRE(pd_hash_file(dir.file("again.csv").c_str(), &hash_b) == PD_OK);
  CHECK(hash_a == hash_b);
  CHECK(hash_a != 0);

  pd_scores* ingested = nullptr;
  REQUIRE(pd_scores_ingest(csv.c_str(), h.dataset, &ingested) == PD_OK);
  pd_scores_free(ingested);
}

TEST_CASE("errors are reported through status codes and pd_last_error") {
  testing::TempDir dir("capi_err");
  const std::string data = dir.file("data");
  REQUIRE(pd_synthesize(kSpec, data.c_str()) == PD_OK);
  Handles h;
  REQUIRE(pd_dataset_load(data.c_str(), nullptr, &h.dataset) == PD_OK);

  CHECK(pd_train_ranker(h.dataset, R"({"epoch": 3})", &h.model) == PD_ERR_INVALID_ARGUMENT);
  CHECK(std::string(pd_last_error()).find("unknown option 'epoch'") != std::string::npos);
  CHECK(h.model == nullptr);

  CHECK(pd_train_ranker(h.dataset, "{not json", &h.model) == PD_ERR_PARSE);
  CHECK(pd_synthesize(R"({"bogus": 1})", dir.file("x").c_str()) == PD_ERR_INVALID_ARGUMENT);
  CHECK(pd_dataset_load(nullptr, nullptr, &h.dataset) == PD_ERR_INVALID_ARGUMENT);
  CHECK(pd_dataset_load(dir.file("missing").c_str(), nullptr, &h.dataset) != PD_OK);
  CHECK(pd_model_load(dir.file("missing.json").c_str(), &h.model) == PD_ERR_IO);
  CHECK(pd_hash_file(dir.file("missing.bin").c_str(), nullptr) == PD_ERR_INVALID_ARGUMENT);

  REQUIRE(pd_train_ranker(h.dataset, R"({"epochs": 5})", &h.model) == PD_OK);
  REQUIRE(pd_score(h.model, h.dataset, &h.scores) == PD_OK);
  char* out = nullptr;
  CHECK(pd_describe(h.model, h.scores, "img00001", "img00002", 3, &out) == PD_ERR_STATE);
  CHECK(pd_predict(h.model, h.scores, "img00001", "nope", "widest", &out) != PD_OK);
  REQUIRE(pd_train_prominence(h.model, h.dataset, h.scores, nullptr) == PD_OK);
  CHECK(pd_describe(h.model, h.scores, "img00001", "nope", 3, &out) == PD_ERR_NOT_FOUND);
  CHECK(std::string(pd_last_error()).find("nope") != std::string::npos);
  CHECK(pd_describe(h.model, h.scores, "img00001", "img00002", 0, &out) == PD_ERR_INVALID_ARGUMENT);
  CHECK(pd_predict(h.model, h.scores, "img00001", "img00002", "oracle", &out) == PD_ERR_INVALID_ARGUMENT);
  CHECK(out == nullptr);
  CHECK(pd_evaluate(h.dataset, R"({"folds": 100})", &out) == PD_ERR_INVALID_ARGUMENT);

  pd_string_free(nullptr);
  pd_dataset_free(nullptr);
  pd_model_free(nullptr);
  pd_scores_free(nullptr);
}
