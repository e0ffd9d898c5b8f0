// Command-line front end over the prominence C API. Every subcommand that
// writes files also writes a manifest (argv, config, seeds, input and output
// hashes) that `replay` can re-execute and verify.

#include <prominence/prominence.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct CliError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(pd_status s, const std::string& what) {
  if (s != PD_OK) throw CliError(what + ": " + pd_last_error() + " [" + pd_status_name(s) + "]");
}

// RAII wrappers over the opaque handles.
struct Dataset {
  pd_dataset* h = nullptr;
  Dataset(const std::string& dir, int annotators) {
    const json o{{"annotator_count", annotators}};
    check(pd_dataset_load(dir.c_str(), o.dump().c_str(), &h), "loading dataset '" + dir + "'");
  }
  ~Dataset() { pd_dataset_free(h); }
};

struct Model {
  pd_model* h = nullptr;
  Model() = default;
  explicit Model(const std::string& path) { check(pd_model_load(path.c_str(), &h), "loading model '" + path + "'"); }
  ~Model() { pd_model_free(h); }
};

struct Scores {
  pd_scores* h = nullptr;
  ~Scores() { pd_scores_free(h); }
};

std::string take(char* s) {
  std::string out(s);
  pd_string_free(s);
  return out;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string hash_file(const std::string& path) {
  std::uint64_t h = 0;
  check(pd_hash_file(path.c_str(), &h), "hashing '" + path + "'");
  return hex64(h);
}

std::string hash_text(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return hex64(h);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CliError("cannot write '" + path + "'");
  out << text;
  if (!out) throw CliError("write failed for '" + path + "'");
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::pair<std::string, std::string> split_pair(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos || comma == 0 || comma + 1 == s.size())
    throw CliError("--pair expects two image ids as i,j");
  return {s.substr(0, comma), s.substr(comma + 1)};
}

// Files in a dataset directory that feed the pipeline.
std::vector<std::string> dataset_files(const std::string& dir) {
  std::vector<std::string> out;
  for (const char* name : {"vocab.json", "images.jsonl", "pairs.csv", "votes.jsonl", "spec.json", "latents.csv",
                           "oracle.jsonl"}) {
    const auto p = (fs::path(dir) / name).string();
    if (fs::exists(p)) out.push_back(p);
  }
  return out;
}

// Accumulates what a run read and wrote, then writes the manifest.
struct Run {
  std::string subcommand;
  std::vector<std::string> argv;
  json config = json::object();
  json seeds = json::object();
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;

  std::string config_hash() const { return hash_text(config.dump()); }
  json stamp() const { return {{"subcommand", subcommand}, {"seeds", seeds}, {"config_hash", config_hash()}}; }

  void write_manifest(const std::string& path) const {
    json in = json::array(), out = json::array();
    for (const auto& p : inputs) in.push_back({{"path", p}, {"fnv1a", hash_file(p)}});
    for (const auto& p : outputs) out.push_back({{"path", p}, {"fnv1a", hash_file(p)}});
    const json manifest{{"tool", "prominence"},
                        {"version", pd_version()},
                        {"subcommand", subcommand},
                        {"argv", argv},
                        {"cwd", fs::current_path().string()},
                        {"config", config},
                        {"config_hash", config_hash()},
                        {"seeds", seeds},
                        {"inputs", in},
                        {"outputs", out}};
    write_text(path, manifest.dump(2) + "\n");
    std::cerr << "manifest: " << path << "\n";
  }
};

int run_cli(const std::vector<std::string>& args);

struct Options {
  // shared
  std::string data, model, scores, out, out_dir, pair, method = "model", manifest;
  int annotators = 7;
  std::uint64_t seed = 0;
  // synth
  std::size_t m = 10, d = 32, images = 400, ordered = 4000, similar = 500, labeled = 4000;
  std::uint64_t map_seed = 1, synth_seed = 7;
  std::vector<double> alpha, beta;
  double temperature = 0.5, noise = 0.01;
  // rankers and classifiers
  double ranker_c = 1.0, similar_margin = 0.1, prominence_c = 0.1;
  std::size_t epochs = 200;
  std::string feature_map = "mean_absdiff";
  bool no_baselines = false;
  // evaluate
  std::vector<std::string> methods{"model", "widest", "single", "prior"};
  std::size_t folds = 10, max_k = 5;
  std::string oracle = "auto";
  // search
  std::size_t database_size = 5000, targets = 200, iterations = 5, page_size = 16, references = 8;
  double feedback_noise = 0.25, threshold = 0.1;
  // describe
  std::size_t k = 3;
  // serve
  std::string host = "127.0.0.1", assets;
  int port = 8080;
  long long ttl = 3600;
  std::size_t max_sessions = 1024;
};

void add_data(CLI::App* sub, Options& o) {
  sub->add_option("--data", o.data, "Dataset directory (vocab.json, images.jsonl, pairs.csv, votes.jsonl)")
      ->required();
  sub->add_option("--annotators", o.annotators, "Expected votes per pair; 0 disables the check")
      ->capture_default_str();
}

int cmd_synth(Options& o, Run& run) {
  json spec{{"M", o.m},
            {"D", o.d},
            {"n_images", o.images},
            {"map_seed", o.map_seed},
            {"annotator_count", o.annotators},
            {"temperature", o.temperature},
            {"seed", o.synth_seed},
            {"noise_sigma", o.noise},
            {"n_ordered_pairs", o.ordered},
            {"n_similar_pairs", o.similar},
            {"n_labeled_pairs", o.labeled}};
  auto broadcast = [&](const std::vector<double>& v, const char* name) {
    if (v.size() == 1) return std::vector<double>(o.m, v.front());
    if (v.size() != o.m) throw CliError(std::string("--") + name + " needs 1 or M values");
    return v;
  };
  if (!o.alpha.empty()) spec["alpha"] = broadcast(o.alpha, "alpha");
  if (!o.beta.empty()) spec["beta"] = broadcast(o.beta, "beta");
  run.config = spec;
  run.seeds = {{"seed", o.synth_seed}, {"map_seed", o.map_seed}};
  check(pd_synthesize(spec.dump().c_str(), o.out.c_str()), "synth");
  run.outputs = dataset_files(o.out);
  run.write_manifest((fs::path(o.out) / "manifest.json").string());
  std::cout << "wrote synthetic dataset to " << o.out << "\n";
  return 0;
}

int cmd_train_ranker(Options& o, Run& run) {
  Dataset ds(o.data, o.annotators);
  const json opts{{"C", o.ranker_c}, {"epochs", o.epochs}, {"similar_margin", o.similar_margin}, {"seed", o.seed}};
  run.config = {{"data", o.data}, {"ranker", opts}, {"annotators", o.annotators}};
  run.seeds = {{"seed", o.seed}};
  run.inputs = dataset_files(o.data);
  Model model;
  check(pd_train_ranker(ds.h, opts.dump().c_str(), &model.h), "train-ranker");
  check(pd_model_save(model.h, o.out.c_str(), run.stamp().dump().c_str()), "saving model");
  run.outputs = {o.out};
  run.write_manifest(o.out + ".manifest.json");
  std::cout << "wrote ranker to " << o.out << "\n";
  return 0;
}

int cmd_score(Options& o, Run& run) {
  Dataset ds(o.data, o.annotators);
  Model model(o.model);
  run.config = {{"data", o.data}, {"model", o.model}};
  run.inputs = dataset_files(o.data);
  run.inputs.push_back(o.model);
  Scores scores;
  check(pd_score(model.h, ds.h, &scores.h), "score");
  check(pd_scores_save(scores.h, o.out.c_str()), "saving scores");
  run.outputs = {o.out};
  run.write_manifest(o.out + ".manifest.json");
  std::cout << "wrote scores to " << o.out << "\n";
  return 0;
}

// Scores for the dataset: external file when given, else the model's ranker.
void load_scores(const Options& o, Model& model, Dataset& ds, Scores& scores, Run& run) {
  if (!o.scores.empty()) {
    check(pd_scores_ingest(o.scores.c_str(), ds.h, &scores.h), "ingesting scores '" + o.scores + "'");
    run.inputs.push_back(o.scores);
  } else {
    check(pd_score(model.h, ds.h, &scores.h), "scoring dataset");
  }
}

int cmd_train_prominence(Options& o, Run& run) {
  Dataset ds(o.data, o.annotators);
  if (o.model.empty() && o.scores.empty()) throw CliError("train-prominence needs --model or --scores");
  Model model;
  if (!o.model.empty()) {
    model.h = nullptr;
    check(pd_model_load(o.model.c_str(), &model.h), "loading model '" + o.model + "'");
    run.inputs.push_back(o.model);
  } else {
    check(pd_model_create(ds.h, &model.h), "creating model");
  }
  const json opts{{"C", o.prominence_c}, {"feature_map", o.feature_map}, {"seed", o.seed},
                  {"baselines", !o.no_baselines}};
  run.config = {{"data", o.data}, {"model", o.model}, {"scores", o.scores}, {"prominence", opts}};
  run.seeds = {{"seed", o.seed}};
  for (const auto& f : dataset_files(o.data)) run.inputs.push_back(f);
  Scores scores;
  load_scores(o, model, ds, scores, run);
  check(pd_train_prominence(model.h, ds.h, scores.h, opts.dump().c_str()), "train-prominence");
  check(pd_model_save(model.h, o.out.c_str(), run.stamp().dump().c_str()), "saving model");
  run.outputs = {o.out};
  run.write_manifest(o.out + ".manifest.json");
  std::cout << "wrote model to " << o.out << "\n";
  return 0;
}

int cmd_predict(Options& o, Run& run) {
  Dataset ds(o.data, o.annotators);
  Model model(o.model);
  const auto [i, j] = split_pair(o.pair);
  run.config = {{"data", o.data}, {"model", o.model}, {"scores", o.scores}, {"pair", o.pair}, {"method", o.method}};
  run.inputs = dataset_files(o.data);
  run.inputs.push_back(o.model);
  Scores scores;
  load_scores(o, model, ds, scores, run);
  char* out = nullptr;
  check(pd_predict(model.h, scores.h, i.c_str(), j.c_str(), o.method.c_str(), &out), "predict");
  const std::string text = json::parse(take(out)).dump(2) + "\n";
  if (o.out.empty()) {
    std::cout << text;
  } else {
    write_text(o.out, text);
    run.outputs = {o.out};
    run.write_manifest(o.out + ".manifest.json");
  }
  return 0;
}

int cmd_describe(Options& o, Run& run) {
  Dataset ds(o.data, o.annotators);
  Model model(o.model);
  const auto [i, j] = split_pair(o.pair);
  run.config = {{"data", o.data}, {"model", o.model}, {"scores", o.scores}, {"pair", o.pair}, {"k", o.k}};
  run.inputs = dataset_files(o.data);
  run.inputs.push_back(o.model);
  Scores scores;
  load_scores(o, model, ds, scores, run);
  char* out = nullptr;
  check(pd_describe(model.h, scores.h, i.c_str(), j.c_str(), o.k, &out), "describe");
  const json doc = json::parse(take(out));
  if (o.out.empty()) {
    std::cout << doc["text"].get<std::string>() << "\n" << doc.dump(2) << "\n";
  } else {
    std::cout << doc["text"].get<std::string>() << "\n";
    write_text(o.out, doc.dump(2) + "\n");
    run.outputs = {o.out};
    run.write_manifest(o.out + ".manifest.json");
  }
  return 0;
}

int cmd_evaluate(Options& o, Run& run) {
  Dataset ds(o.data, o.annotators);
  json opts{{"folds", o.folds},
            {"seed", o.seed},
            {"max_k", o.max_k},
            {"methods", o.methods},
            {"ranker", {{"C", o.ranker_c}, {"epochs", o.epochs}, {"similar_margin", o.similar_margin}}},
            {"prominence", {{"C", o.prominence_c}, {"feature_map", o.feature_map}}}};
  if (!o.scores.empty()) {
    opts["scores_path"] = o.scores;
    run.inputs.push_back(o.scores);
  }
  if (o.oracle == "on") opts["oracle"] = true;
  if (o.oracle == "off") opts["oracle"] = false;
  run.config = {{"data", o.data}, {"evaluate", opts}};
  run.seeds = {{"seed", o.seed}};
  for (const auto& f : dataset_files(o.data)) run.inputs.push_back(f);
  char* out = nullptr;
  check(pd_evaluate(ds.h, opts.dump().c_str(), &out), "evaluate");
  json result = json::parse(take(out));
  fs::create_directories(o.out_dir);
  const auto csv = (fs::path(o.out_dir) / "accuracy.csv").string();
  const auto summary = (fs::path(o.out_dir) / "summary.json").string();
  const auto curves = (fs::path(o.out_dir) / "curves.dat").string();
  write_text(csv, result["accuracy_csv"].get<std::string>());
  json s = result["summary"];
  s["run"] = run.stamp();
  write_text(summary, s.dump(2) + "\n");
  write_text(curves, result["gnuplot"].get<std::string>());
  run.outputs = {csv, summary, curves};
  run.write_manifest((fs::path(o.out_dir) / "manifest.json").string());
  std::cout << result["gnuplot"].get<std::string>();
  return 0;
}

int cmd_search_sim(Options& o, Run& run) {
  Dataset ds(o.data, o.annotators);
  Model model(o.model);
  const json opts{{"database_size", o.database_size}, {"targets", o.targets},     {"iterations", o.iterations},
                  {"page_size", o.page_size},         {"references", o.references}, {"noise", o.feedback_noise},
                  {"threshold", o.threshold},         {"seed", o.seed}};
  run.config = {{"data", o.data}, {"model", o.model}, {"search", opts}};
  run.seeds = {{"seed", o.seed}};
  run.inputs = dataset_files(o.data);
  run.inputs.push_back(o.model);
  char* out = nullptr;
  check(pd_search_experiment(model.h, ds.h, opts.dump().c_str(), &out), "search-sim");
  json result = json::parse(take(out));
  fs::create_directories(o.out_dir);
  const auto csv = (fs::path(o.out_dir) / "search.csv").string();
  const auto summary = (fs::path(o.out_dir) / "search_summary.json").string();
  write_text(csv, result["csv"].get<std::string>());
  json s = result["summary"];
  s["run"] = run.stamp();
  write_text(summary, s.dump(2) + "\n");
  run.outputs = {csv, summary};
  run.write_manifest((fs::path(o.out_dir) / "manifest.json").string());
  for (const auto& it : s["iterations"])
    std::cout << "iteration " << it["iteration"] << ": median percentile prominence "
              << it["median_percentile"]["prominence"] << ", baseline " << it["median_percentile"]["baseline"]
              << ", sign test p " << it["sign_test_p"] << "\n";
  return 0;
}

int cmd_serve(Options& o) {
  Dataset ds(o.data, o.annotators);
  Model model(o.model);
  Scores scores;
  if (!o.scores.empty())
    check(pd_scores_ingest(o.scores.c_str(), ds.h, &scores.h), "ingesting scores '" + o.scores + "'");
  json opts{{"host", o.host},          {"port", o.port}, {"page_size", o.page_size}, {"session_ttl", o.ttl},
            {"max_sessions", o.max_sessions}, {"seed", o.seed}};
  if (!o.assets.empty()) opts["asset_dir"] = o.assets;
  check(pd_serve(model.h, ds.h, scores.h, opts.dump().c_str()), "serve");
  return 0;
}

int cmd_replay(const Options& o) {
  const json manifest = json::parse(read_text(o.manifest));
  const auto argv = manifest.at("argv").get<std::vector<std::string>>();
  const auto recorded = manifest.at("outputs");
  const fs::path previous = fs::current_path();
  fs::current_path(manifest.at("cwd").get<std::string>());
  int rc = run_cli(argv);
  int mismatches = 0;
  if (rc == 0) {
    for (const auto& entry : recorded) {
      const auto path = entry.at("path").get<std::string>();
      const auto want = entry.at("fnv1a").get<std::string>();
      const auto got = fs::exists(path) ? hash_file(path) : std::string("missing");
      const bool same = got == want;
      mismatches += !same;
      std::cout << (same ? "identical " : "DIFFERENT ") << path << " " << got << "\n";
    }
  }
  fs::current_path(previous);
  if (rc != 0) return rc;
  std::cout << (mismatches == 0 ? "replay: all outputs bit-identical\n" : "replay: outputs differ\n");
  return mismatches == 0 ? 0 : 1;
}

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Prominent relative-attribute differences: training, evaluation, search and description"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(pd_version()));
  Options o;

  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset with oracle labels");
  synth->add_option("--out", o.out, "Output directory")->required();
  synth->add_option("--m", o.m, "Number of attributes")->capture_default_str();
  synth->add_option("--d", o.d, "Descriptor dimension")->capture_default_str();
  synth->add_option("--images", o.images, "Number of images")->capture_default_str();
  synth->add_option("--seed", o.synth_seed, "Generator seed")->capture_default_str();
  synth->add_option("--map-seed", o.map_seed, "Seed of the latent-to-descriptor map")->capture_default_str();
  synth->add_option("--annotators", o.annotators, "Votes per labeled pair")->capture_default_str();
  synth->add_option("--alpha", o.alpha, "Difference weight, one value or M comma-separated")->delimiter(',');
  synth->add_option("--beta", o.beta, "Mean-strength weight, one value or M comma-separated")->delimiter(',');
  synth->add_option("--temperature", o.temperature, "Annotator softmax temperature")->capture_default_str();
  synth->add_option("--noise", o.noise, "Descriptor noise sigma")->capture_default_str();
  synth->add_option("--ordered", o.ordered, "Ordered training pairs")->capture_default_str();
  synth->add_option("--similar", o.similar, "Similar training pairs")->capture_default_str();
  synth->add_option("--labeled", o.labeled, "Pairs with annotator votes")->capture_default_str();

  auto* train_ranker = app.add_subcommand("train-ranker", "Train per-attribute linear rankers");
  add_data(train_ranker, o);
  train_ranker->add_option("--out", o.out, "Model file to write")->required();
  train_ranker->add_option("--C", o.ranker_c, "Ranking SVM C")->capture_default_str();
  train_ranker->add_option("--epochs", o.epochs, "Subgradient epochs")->capture_default_str();
  train_ranker->add_option("--similar-margin", o.similar_margin, "Similar-pair margin")->capture_default_str();
  train_ranker->add_option("--seed", o.seed, "Training seed")->capture_default_str();

  auto* score = app.add_subcommand("score", "Write standardized attribute scores for every dataset image");
  add_data(score, o);
  score->add_option("--model", o.model, "Model file with a ranker")->required();
  score->add_option("--out", o.out, "Score CSV to write")->required();

  auto* train_prom = app.add_subcommand("train-prominence", "Train the prominence model and baselines");
  add_data(train_prom, o);
  train_prom->add_option("--model", o.model, "Model file with a ranker");
  train_prom->add_option("--scores", o.scores, "External score CSV used instead of the ranker");
  train_prom->add_option("--out", o.out, "Model file to write")->required();
  train_prom->add_option("--C", o.prominence_c, "Classifier C")->capture_default_str();
  train_prom->add_option("--feature-map", o.feature_map, "mean_absdiff, product, absdiff or weighted_average")
      ->capture_default_str();
  train_prom->add_option("--seed", o.seed, "Training seed")->capture_default_str();
  train_prom->add_flag("--no-baselines", o.no_baselines, "Skip fitting the baselines");

  auto* predict = app.add_subcommand("predict", "Ranked prominent differences for one pair");
  add_data(predict, o);
  predict->add_option("--model", o.model, "Model file")->required();
  predict->add_option("--pair", o.pair, "Image ids i,j")->required();
  predict->add_option("--method", o.method, "model, widest, single or prior")->capture_default_str();
  predict->add_option("--scores", o.scores, "External score CSV");
  predict->add_option("--out", o.out, "JSON file to write instead of stdout");

  auto* describe = app.add_subcommand("describe", "Comparative description of one pair");
  add_data(describe, o);
  describe->add_option("--model", o.model, "Model file")->required();
  describe->add_option("--pair", o.pair, "Image ids i,j")->required();
  describe->add_option("-k", o.k, "Number of differences")->capture_default_str();
  describe->add_option("--scores", o.scores, "External score CSV");
  describe->add_option("--out", o.out, "JSON file to write");

  auto* evaluate = app.add_subcommand("evaluate", "Cross-validated top-k accuracy of methods");
  add_data(evaluate, o);
  evaluate->add_option("--out-dir", o.out_dir, "Directory for accuracy.csv, summary.json, curves.dat")->required();
  evaluate->add_option("--methods", o.methods, "Comma-separated: model, widest, single, prior")
      ->delimiter(',')
      ->capture_default_str();
  evaluate->add_option("--folds", o.folds, "Image-disjoint folds")->capture_default_str();
  evaluate->add_option("--seed", o.seed, "Fold and training seed")->capture_default_str();
  evaluate->add_option("--max-k", o.max_k, "Largest k")->capture_default_str();
  evaluate->add_option("--ranker-C", o.ranker_c, "Ranking SVM C")->capture_default_str();
  evaluate->add_option("--epochs", o.epochs, "Ranker epochs")->capture_default_str();
  evaluate->add_option("--C", o.prominence_c, "Prominence classifier C")->capture_default_str();
  evaluate->add_option("--feature-map", o.feature_map, "Pair feature map")->capture_default_str();
  evaluate->add_option("--scores", o.scores, "External score CSV instead of per-fold rankers");
  evaluate->add_option("--oracle", o.oracle, "Report oracle top-1 accuracy: auto, on or off")
      ->check(CLI::IsMember({"auto", "on", "off"}))
      ->capture_default_str();

  auto* search = app.add_subcommand("search-sim", "Simulated-user WhittleSearch experiment");
  add_data(search, o);
  search->add_option("--model", o.model, "Model file with ranker and prominence")->required();
  search->add_option("--out-dir", o.out_dir, "Directory for search.csv and search_summary.json")->required();
  search->add_option("--database-size", o.database_size, "Unseen database images")->capture_default_str();
  search->add_option("--targets", o.targets, "Mental targets")->capture_default_str();
  search->add_option("--iterations", o.iterations, "Feedback rounds")->capture_default_str();
  search->add_option("--page-size", o.page_size, "Results shown per round")->capture_default_str();
  search->add_option("--references", o.references, "References picked per round")->capture_default_str();
  search->add_option("--noise", o.feedback_noise, "Share of random true-difference feedback")->capture_default_str();
  search->add_option("--threshold", o.threshold, "Minimum |dr| for a true difference")->capture_default_str();
  search->add_option("--seed", o.seed, "Experiment seed")->capture_default_str();

  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  add_data(serve, o);
  serve->add_option("--model", o.model, "Model file")->required();
  serve->add_option("--scores", o.scores, "External score CSV for the database");
  serve->add_option("--host", o.host, "Bind address")->capture_default_str()->envname("PROMINENCE_HOST");
  serve->add_option("--port", o.port, "Port, 0 for any free port")->capture_default_str()->envname("PROMINENCE_PORT");
  serve->add_option("--assets", o.assets, "Static asset directory served at /")->envname("PROMINENCE_ASSETS");
  serve->add_option("--ttl", o.ttl, "Idle session lifetime in seconds")->capture_default_str()->envname(
      "PROMINENCE_SESSION_TTL");
  serve->add_option("--max-sessions", o.max_sessions, "Concurrent session limit")->capture_default_str();
  serve->add_option("--page-size", o.page_size, "Default page size")->capture_default_str();
  serve->add_option("--seed", o.seed, "Session shuffle seed")->capture_default_str();

  auto* replay = app.add_subcommand("replay", "Re-run a manifest and verify its outputs are bit-identical");
  replay->add_option("manifest", o.manifest, "Manifest file")->required();

  std::vector<const char*> cargv{"prominence"};
  for (const auto& a : args) cargv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(cargv.size()), cargv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  Run run;
  run.argv = args;
  try {
    if (synth->parsed()) return run.subcommand = "synth", cmd_synth(o, run);
    if (train_ranker->parsed()) return run.subcommand = "train-ranker", cmd_train_ranker(o, run);
    if (score->parsed()) return run.subcommand = "score", cmd_score(o, run);
    if (train_prom->parsed()) return run.subcommand = "train-prominence", cmd_train_prominence(o, run);
    if (predict->parsed()) return run.subcommand = "predict", cmd_predict(o, run);
    if (describe->parsed()) return run.subcommand = "describe", cmd_describe(o, run);
    if (evaluate->parsed()) return run.subcommand = "evaluate", cmd_evaluate(o, run);
    if (search->parsed()) return run.subcommand = "search-sim", cmd_search_sim(o, run);
    if (serve->parsed()) return cmd_serve(o);
    if (replay->parsed()) return cmd_replay(o);
  } catch (const CliError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args);
}
