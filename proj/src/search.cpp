#include "search.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "error.hpp"
#include "parallel.hpp"
#include "text_io.hpp"

namespace prom {

bool satisfies(const ScoreMatrix& scores, std::size_t image, const Constraint& c) {
  if (image >= scores.size() || c.ref >= scores.size())
    fail(ErrorCode::NotFound, "constraint refers to an image without a score row");
  if (c.attribute >= scores.num_attributes())
    fail(ErrorCode::InvalidArgument, "constraint attribute " + std::to_string(c.attribute) + " out of range");
  const double mine = scores.at(image, c.attribute);
  const double ref = scores.at(c.ref, c.attribute);
  switch (c.polarity) {
    case Polarity::More: return mine > ref;
    case Polarity::Less: return mine < ref;
    case Polarity::Equal: return false;
  }
  return false;
}

namespace {

void check_constraint(const ScoreMatrix& scores, const Constraint& c) {
  if (c.ref >= scores.size())
    fail(ErrorCode::NotFound, "constraint reference row " + std::to_string(c.ref) + " has no scores");
  if (c.attribute >= scores.num_attributes())
    fail(ErrorCode::InvalidArgument, "constraint attribute " + std::to_string(c.attribute) + " out of range");
}

void check_image(const ScoreMatrix& scores, std::size_t image) {
  if (image >= scores.size()) fail(ErrorCode::NotFound, "image row " + std::to_string(image) + " has no scores");
}

double log_confidence(const ProminenceModel& model, const ScoreMatrix& scores, std::size_t image,
                      const Constraint& c) {
  const auto phi = pair_feature(scores.row(image), scores.row(c.ref), model.feature_map);
  const double p = std::clamp(model.confidence(c.attribute, phi), kRelevanceFloor, 1.0 - kRelevanceFloor);
  return std::log(p);
}

}  // namespace

int satisfaction_count(const ScoreMatrix& scores, std::size_t image, const std::vector<Constraint>& constraints) {
  check_image(scores, image);
  int n = 0;
  for (const auto& c : constraints) {
    check_constraint(scores, c);
    n += satisfies(scores, image, c);
  }
  return n;
}

double prominence_relevance(const ProminenceModel& model, const ScoreMatrix& scores, std::size_t image,
                            const std::vector<Constraint>& constraints) {
  check_image(scores, image);
  double total = 0.0;
  for (const auto& c : constraints) {
    check_constraint(scores, c);
    total += log_confidence(model, scores, image, c);
  }
  return total;
}

std::string_view to_string(SearchVariant v) { return v == SearchVariant::Prominence ? "prominence" : "baseline"; }

SearchVariant search_variant_from_string(std::string_view name) {
  if (name == "prominence") return SearchVariant::Prominence;
  if (name == "baseline") return SearchVariant::Baseline;
  fail(ErrorCode::InvalidArgument, "unknown search variant '" + std::string(name) + "'");
}

SearchSession::SearchSession(const ScoreMatrix& scores, const ProminenceModel* model, SearchVariant variant,
                             std::uint64_t seed, std::size_t page_size)
    : scores_(scores), model_(model), variant_(variant), page_size_(page_size) {
  require(scores.size() > 0, "search database is empty");
  require(page_size >= 1, "page size must be >= 1");
  if (variant == SearchVariant::Prominence) {
    require(model != nullptr, "prominence search needs a model");
    require(model->num_attributes() == scores.num_attributes(), "model and database attribute counts differ");
  }
  const std::size_t n = scores.size();
  counts_.assign(n, 0);
  log_relevance_.assign(n, 0.0);
  displayed_.assign(n, false);
  shuffle_key_.resize(n);
  for (std::size_t i = 0; i < n; ++i) shuffle_key_[i] = derive_seed(seed, i);
  rerank();
}

void SearchSession::add_feedback(const std::vector<Constraint>& constraints) {
  for (const auto& c : constraints) check_constraint(scores_, c);
  const std::size_t n = scores_.size();
  for (const auto& c : constraints) {
    constraints_.push_back(c);
    for (std::size_t i = 0; i < n; ++i) counts_[i] += satisfies(scores_, i, c);
    if (variant_ == SearchVariant::Prominence)
      for (std::size_t i = 0; i < n; ++i) log_relevance_[i] += log_confidence(*model_, scores_, i, c);
  }
  ++iteration_;
  rerank();
}

void SearchSession::rerank() {
  const std::size_t n = scores_.size();
  ranking_.resize(n);
  std::iota(ranking_.begin(), ranking_.end(), 0);
  const bool by_relevance = variant_ == SearchVariant::Prominence;
  const auto& ids = scores_.ids();
  std::sort(ranking_.begin(), ranking_.end(), [&](std::size_t a, std::size_t b) {
    if (counts_[a] != counts_[b]) return counts_[a] > counts_[b];
    if (by_relevance && log_relevance_[a] != log_relevance_[b]) return log_relevance_[a] > log_relevance_[b];
    if (shuffle_key_[a] != shuffle_key_[b]) return shuffle_key_[a] < shuffle_key_[b];
    return ids[a] < ids[b];
  });
  position_.resize(n);
  for (std::size_t p = 0; p < n; ++p) position_[ranking_[p]] = p;
}

std::vector<std::size_t> SearchSession::page() const {
  const std::size_t n = std::min(page_size_, ranking_.size());
  return {ranking_.begin(), ranking_.begin() + static_cast<std::ptrdiff_t>(n)};
}

std::vector<std::size_t> SearchSession::show_page() {
  auto p = page();
  for (std::size_t i : p) displayed_[i] = true;
  return p;
}

bool SearchSession::grouping_holds() const {
  for (std::size_t p = 1; p < ranking_.size(); ++p)
    if (counts_[ranking_[p]] > counts_[ranking_[p - 1]]) return false;
  return true;
}

std::vector<Constraint> simulate_user_feedback(const ScoreMatrix& scores, std::size_t target,
                                               const std::vector<std::size_t>& page,
                                               const ProminenceOracle& oracle, const FeedbackConfig& config,
                                               Rng& rng) {
  check_image(scores, target);
  std::vector<std::size_t> candidates;
  for (std::size_t i : page)
    if (i != target) candidates.push_back(i);
  const auto picks = rng.sample_without_replacement(candidates.size(), config.num_references);

  const std::size_t M = scores.num_attributes();
  const auto r_t = scores.row(target);
  std::vector<Constraint> out;
  for (std::size_t pick : picks) {
    const std::size_t ref = candidates[pick];
    const auto r_ref = scores.row(ref);
    AttributeId m;
    if (rng.uniform() >= config.noise_probability) {
      m = oracle(target, ref);
    } else {
      std::vector<AttributeId> true_diffs;
      for (AttributeId a = 0; a < M; ++a)
        if (std::abs(r_t[a] - r_ref[a]) > config.true_difference_threshold) true_diffs.push_back(a);
      if (!true_diffs.empty()) {
        m = true_diffs[rng.below(true_diffs.size())];
      } else {
        std::vector<double> gap(M);
        for (AttributeId a = 0; a < M; ++a) gap[a] = std::abs(r_t[a] - r_ref[a]);
        m = rank_by_score(gap).front();
      }
    }
    require(m < M, "oracle returned an attribute out of range");
    const Polarity pol = polarity_of(r_t[m], r_ref[m]);
    if (pol == Polarity::Equal) continue;
    out.push_back({ref, m, pol});
  }
  return out;
}

const VariantResult& ExperimentResult::variant(SearchVariant v) const {
  for (const auto& r : variants)
    if (r.variant == v) return r;
  fail(ErrorCode::NotFound, "no results for variant '" + std::string(to_string(v)) + "'");
}

ExperimentResult run_search_experiment(const ScoreMatrix& database, const ProminenceModel& model,
                                       const std::vector<std::size_t>& targets, const ProminenceOracle& oracle,
                                       const ExperimentConfig& config) {
  require(!targets.empty(), "search experiment needs targets");
  for (std::size_t t : targets) check_image(database, t);

  ExperimentResult result;
  result.database_size = database.size();
  for (SearchVariant variant : {SearchVariant::Prominence, SearchVariant::Baseline}) {
    VariantResult vr;
    vr.variant = variant;
    vr.traces.resize(targets.size());
    std::vector<std::size_t> violations(targets.size(), 0);
    parallel_for(targets.size(), [&](std::size_t k) {
      const std::size_t target = targets[k];
      const std::uint64_t target_seed = derive_seed(config.seed, k);
      SearchSession session(database, &model, variant, derive_seed(target_seed, 1), config.page_size);
      Rng feedback_rng(derive_seed(target_seed, 2));
      TargetTrace& trace = vr.traces[k];
      trace.target = target;
      trace.ranks.push_back(session.rank_of(target));
      for (std::size_t it = 0; it < config.iterations; ++it) {
        const auto shown = session.show_page();
        session.add_feedback(simulate_user_feedback(database, target, shown, oracle, config.feedback, feedback_rng));
        if (!session.grouping_holds()) ++violations[k];
        trace.ranks.push_back(session.rank_of(target));
      }
    });
    for (std::size_t v : violations) vr.grouping_violations += v;
    result.variants.push_back(std::move(vr));
  }
  return result;
}

double percentile(std::size_t rank, std::size_t database_size) {
  return 100.0 * static_cast<double>(rank) / static_cast<double>(database_size);
}

double sign_test_p(std::size_t wins, std::size_t losses) {
  const std::size_t n = wins + losses;
  if (n == 0) return 1.0;
  // Sum the upper tail in log space.
  const double log_half_n = static_cast<double>(n) * std::log(0.5);
  double p = 0.0;
  for (std::size_t x = wins; x <= n; ++x) {
    const double log_choose = std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(x) + 1.0) -
                              std::lgamma(static_cast<double>(n - x) + 1.0);
    p += std::exp(log_choose + log_half_n);
  }
  return std::min(p, 1.0);
}

namespace {

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

std::vector<IterationSummary> summarize(const ExperimentResult& result) {
  const auto& prom_r = result.variant(SearchVariant::Prominence);
  const auto& base_r = result.variant(SearchVariant::Baseline);
  require(prom_r.traces.size() == base_r.traces.size(), "variants cover different targets");
  const std::size_t iterations = prom_r.traces.empty() ? 0 : prom_r.traces.front().ranks.size();
  std::vector<IterationSummary> out;
  for (std::size_t it = 0; it < iterations; ++it) {
    IterationSummary s;
    s.iteration = it;
    std::vector<double> pp, pb;
    for (std::size_t k = 0; k < prom_r.traces.size(); ++k) {
      const std::size_t a = prom_r.traces[k].ranks[it];
      const std::size_t b = base_r.traces[k].ranks[it];
      pp.push_back(percentile(a, result.database_size));
      pb.push_back(percentile(b, result.database_size));
      s.wins += a < b;
      s.losses += a > b;
    }
    s.median_prominence = median_of(pp);
    s.median_baseline = median_of(pb);
    s.mean_prominence = mean_of(pp);
    s.mean_baseline = mean_of(pb);
    s.sign_test_p = sign_test_p(s.wins, s.losses);
    out.push_back(s);
  }
  return out;
}

std::string experiment_csv(const ExperimentResult& result, const std::vector<std::string>& ids) {
  std::string out = "variant,target_id,iteration,rank,percentile\n";
  for (const auto& v : result.variants) {
    const std::string name(to_string(v.variant));
    for (const auto& t : v.traces)
      for (std::size_t it = 0; it < t.ranks.size(); ++it)
        out += name + "," + ids.at(t.target) + "," + std::to_string(it) + "," + std::to_string(t.ranks[it]) + "," +
               format_double(percentile(t.ranks[it], result.database_size)) + "\n";
  }
  return out;
}

nlohmann::json experiment_summary_json(const ExperimentResult& result) {
  nlohmann::json iterations = nlohmann::json::array();
  for (const auto& s : summarize(result))
    iterations.push_back({{"iteration", s.iteration},
                          {"median_percentile", {{"prominence", s.median_prominence}, {"baseline", s.median_baseline}}},
                          {"mean_percentile", {{"prominence", s.mean_prominence}, {"baseline", s.mean_baseline}}},
                          {"wins", s.wins},
                          {"losses", s.losses},
                          {"sign_test_p", s.sign_test_p}});
  nlohmann::json violations = nlohmann::json::object();
  for (const auto& v : result.variants) violations[std::string(to_string(v.variant))] = v.grouping_violations;
  return {{"database_size", result.database_size},
          {"targets", result.variants.empty() ? 0 : result.variants.front().traces.size()},
          {"grouping_violations", violations},
          {"iterations", iterations}};
}

}  // namespace prom
