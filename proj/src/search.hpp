#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "prominence.hpp"
#include "ranker.hpp"
#include "rng.hpp"

namespace prom {

// "Show me images with more/less of attribute m than reference ref." Image
// references are rows of the database score matrix.
struct Constraint {
  std::size_t ref = 0;
  AttributeId attribute = 0;
  Polarity polarity = Polarity::More;
};

// Strict inequality against the reference; Equal constraints never hold.
bool satisfies(const ScoreMatrix& scores, std::size_t image, const Constraint& c);
int satisfaction_count(const ScoreMatrix& scores, std::size_t image, const std::vector<Constraint>& constraints);

inline constexpr double kRelevanceFloor = 1e-9;

// Sum over constraints of log P_{m_c}(image, ref_c), each P clamped to
// [1e-9, 1 - 1e-9]. Zero for no constraints.
double prominence_relevance(const ProminenceModel& model, const ScoreMatrix& scores, std::size_t image,
                            const std::vector<Constraint>& constraints);

enum class SearchVariant {
  Prominence,  // within a satisfaction group, order by relevance
  Baseline,    // within a satisfaction group, seeded random order
};

std::string_view to_string(SearchVariant v);
SearchVariant search_variant_from_string(std::string_view name);

// One WhittleSearch session over an immutable database. Not thread safe; the
// score matrix and model must outlive the session.
class SearchSession {
 public:
  SearchSession(const ScoreMatrix& scores, const ProminenceModel* model, SearchVariant variant, std::uint64_t seed,
                std::size_t page_size = 16);

  // Appends constraints, updates counts and relevance, re-ranks and advances
  // the iteration counter (also for an empty list).
  void add_feedback(const std::vector<Constraint>& constraints);

  const std::vector<std::size_t>& ranking() const { return ranking_; }
  std::vector<std::size_t> page() const;
  // Records the current page as shown; interactive feedback may only use
  // displayed references.
  std::vector<std::size_t> show_page();
  bool was_displayed(std::size_t image) const { return displayed_[image]; }

  // 1-based position of `image` in the current ranking.
  std::size_t rank_of(std::size_t image) const { return position_[image] + 1; }

  std::size_t iteration() const { return iteration_; }
  std::size_t page_size() const { return page_size_; }
  SearchVariant variant() const { return variant_; }
  const std::vector<Constraint>& constraints() const { return constraints_; }
  const std::vector<int>& counts() const { return counts_; }
  const std::vector<double>& log_relevance() const { return log_relevance_; }
  const ScoreMatrix& scores() const { return scores_; }

  // True when no image is ranked below one satisfying fewer constraints.
  bool grouping_holds() const;

 private:
  void rerank();

  const ScoreMatrix& scores_;
  const ProminenceModel* model_;
  SearchVariant variant_;
  std::size_t page_size_;
  std::vector<Constraint> constraints_;
  std::vector<int> counts_;
  std::vector<double> log_relevance_;
  std::vector<std::uint64_t> shuffle_key_;
  std::vector<std::size_t> ranking_;
  std::vector<std::size_t> position_;
  std::vector<bool> displayed_;
  std::size_t iteration_ = 0;
};

struct FeedbackConfig {
  std::size_t num_references = 8;
  double noise_probability = 0.25;  // share of random true differences
  double true_difference_threshold = 0.1;
};

// Ground-truth prominent attribute between the target and a reference,
// supplied from outside the trained model.
using ProminenceOracle = std::function<AttributeId(std::size_t target, std::size_t ref)>;

// Simulated user: draws references from `page` (the target itself excluded),
// then per reference uses the oracle attribute or, with the noise probability,
// a random attribute whose |dr| exceeds the threshold (widest when none does).
// Polarity is the sign of r(target) - r(ref); a reference whose chosen
// attribute ties the target exactly yields no constraint.
std::vector<Constraint> simulate_user_feedback(const ScoreMatrix& scores, std::size_t target,
                                               const std::vector<std::size_t>& page,
                                               const ProminenceOracle& oracle, const FeedbackConfig& config, Rng& rng);

struct ExperimentConfig {
  std::size_t iterations = 5;
  std::size_t page_size = 16;
  FeedbackConfig feedback;
  std::uint64_t seed = 0;
};

struct TargetTrace {
  std::size_t target = 0;
  std::vector<std::size_t> ranks;  // index 0 is before any feedback
};

struct VariantResult {
  SearchVariant variant = SearchVariant::Prominence;
  std::vector<TargetTrace> traces;
  std::size_t grouping_violations = 0;
};

struct ExperimentResult {
  std::size_t database_size = 0;
  std::vector<VariantResult> variants;  // prominence, baseline

  const VariantResult& variant(SearchVariant v) const;
};

// Both variants see the same targets, the same per-target shuffle keys and
// feedback streams. Runs targets in parallel.
ExperimentResult run_search_experiment(const ScoreMatrix& database, const ProminenceModel& model,
                                       const std::vector<std::size_t>& targets, const ProminenceOracle& oracle,
                                       const ExperimentConfig& config);

// 100 * rank / database size.
double percentile(std::size_t rank, std::size_t database_size);

// One-sided exact sign test: P(X >= wins) for X ~ Binomial(wins + losses, 1/2).
double sign_test_p(std::size_t wins, std::size_t losses);

struct IterationSummary {
  std::size_t iteration = 0;
  double median_prominence = 0.0;  // percentiles
  double median_baseline = 0.0;
  double mean_prominence = 0.0;
  double mean_baseline = 0.0;
  std::size_t wins = 0;  // targets ranked strictly better by prominence
  std::size_t losses = 0;
  double sign_test_p = 1.0;
};

std::vector<IterationSummary> summarize(const ExperimentResult& result);

// variant,target_id,iteration,rank,percentile
std::string experiment_csv(const ExperimentResult& result, const std::vector<std::string>& ids);
nlohmann::json experiment_summary_json(const ExperimentResult& result);

}  // namespace prom
