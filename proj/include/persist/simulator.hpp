// Monte Carlo replay of the core/probe experiment.
//
// Two models are offered.  The urn model replays the combinatorial argument
// directly: q green balls, alpha of n balls repainted red, q probes drawn
// without replacement.  The churn-process model runs the per-unit replacement
// process instead and lets the number of departed core members fall where it
// may, which measures how far the deterministic alpha = ceil(C n) is from the
// random process it summarizes.
//
// Randomness for trial i depends only on (seed, i): the engine for each trial
// is std::mt19937_64 seeded with trial_seed(seed, i).  All aggregates are
// integer sums, so reports are identical for any thread count.

#ifndef PERSIST_SIMULATOR_HPP
#define PERSIST_SIMULATOR_HPP

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "persist/persistence.hpp"

namespace persist {

enum class TrialModel { urn, churn_process };

const char* to_string(TrialModel model);

/// Environment variable consulted for the worker count when none is given.
inline constexpr const char* kThreadsEnvVar = "PERSIST_THREADS";

struct TrialConfig {
  TrialModel model = TrialModel::urn;
  std::int64_t n = 1;
  std::int64_t q = 0;
  std::int64_t trials = 1;
  std::int64_t alpha = 0;  ///< urn model
  double c = 0.0;          ///< churn-process model
  std::int64_t delta = 0;  ///< churn-process model
  /// Churn-process only: replace c*n nodes per unit on average by carrying the
  /// fractional part forward, instead of a constant ceil(c*n).
  bool fractional_churn = false;
  std::uint64_t seed = 0;
  unsigned threads = 0;  ///< 0: PERSIST_THREADS, else hardware concurrency

  /// Throws DomainError for out-of-range fields.
  void validate() const;
};

struct SurvivorStats {
  double core_mean = 0.0;  ///< surviving core members per trial
  double core_stddev = 0.0;
  double initial_fraction_mean = 0.0;  ///< surviving share of all initial nodes
  double initial_fraction_stddev = 0.0;
  std::int64_t replaced_per_unit = 0;  ///< constant mode; 0 in fractional mode
};

struct TrialReport {
  std::int64_t trials = 0;
  std::int64_t misses = 0;
  double epsilon_hat = 0.0;
  double ci_low = 0.0;  ///< 99% Wilson score bounds
  double ci_high = 0.0;
  std::optional<SurvivorStats> survivors;  ///< churn-process model only
};

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

/// Two-sided standard normal quantile for 99% coverage.
inline constexpr double kZ99 = 2.5758293035489004;

/// Wilson score interval for successes out of trials.
Interval wilson_interval(std::int64_t successes, std::int64_t trials, double z = kZ99);

/// splitmix64(splitmix64(seed) ^ splitmix64(index + 1))
std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t index);

/// Draws k distinct values from [0, n) by partial Fisher-Yates over an index
/// array, undoing its swaps afterwards so each draw costs O(k).
class DistinctSampler {
 public:
  explicit DistinctSampler(std::uint32_t n);

  std::uint32_t population() const { return static_cast<std::uint32_t>(perm_.size()); }

  /// Returns k distinct indices; the span is valid until the next draw.
  std::span<const std::uint32_t> draw(std::uint32_t k, std::mt19937_64& rng);

 private:
  std::vector<std::uint32_t> perm_;
  std::vector<std::uint32_t> swaps_;
  std::vector<std::uint32_t> out_;
};

TrialReport run_urn_trials(const TrialConfig& config);
TrialReport run_churn_trials(const TrialConfig& config);
/// Dispatches on config.model.
TrialReport run_trials(const TrialConfig& config);

struct AnalyticComparison {
  TrialReport report;
  std::int64_t alpha = 0;  ///< alpha used for the analytic value
  double ratio_C = 0.0;
  MissProbability analytic;
  double z_score = 0.0;
  bool flagged = false;  ///< |z| > threshold
};

inline constexpr double kZScoreThreshold = 3.0;

/// Runs the simulation and scores its estimate against the closed form.  For
/// the churn-process model alpha = ceil((1 - (1-c)^delta) n).
AnalyticComparison compare_with_analytic(const TrialConfig& config);

}  // namespace persist

#endif  // PERSIST_SIMULATOR_HPP
