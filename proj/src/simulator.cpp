#include "persist/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>

#include <fmt/format.h>

#include "persist/errors.hpp"

namespace persist {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Integer accumulators; merging is associative and commutative.
struct Tally {
  std::int64_t misses = 0;
  std::int64_t core_sum = 0;
  std::int64_t core_sq = 0;
  std::int64_t initial_sum = 0;
  std::int64_t initial_sq = 0;

  Tally& operator+=(const Tally& o) {
    misses += o.misses;
    core_sum += o.core_sum;
    core_sq += o.core_sq;
    initial_sum += o.initial_sum;
    initial_sq += o.initial_sq;
    return *this;
  }
};

unsigned resolve_threads(const TrialConfig& config) {
  unsigned threads = config.threads;
  if (threads == 0) {
    if (const char* env = std::getenv(kThreadsEnvVar); env != nullptr && *env != '\0') {
      threads = static_cast<unsigned>(std::max(1L, std::strtol(env, nullptr, 10)));
    }
  }
  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  const auto cap = static_cast<unsigned>(std::min<std::int64_t>(config.trials, 1024));
  return std::clamp(threads, 1U, std::max(1U, cap));
}

class UrnWorker {
 public:
  explicit UrnWorker(const TrialConfig& config)
      : config_(config),
        sampler_(static_cast<std::uint32_t>(config.n)),
        replaced_tag_(static_cast<std::size_t>(config.n), 0) {}

  void run(std::int64_t trial, Tally& tally) {
    std::mt19937_64 rng(trial_seed(config_.seed, static_cast<std::uint64_t>(trial)));
    const auto q = static_cast<std::uint32_t>(config_.q);
    // The core is nodes [0, q); replaced and probe sets are uniform, so a
    // fixed core has the same miss law as a uniformly chosen one.
    ++tag_;
    for (const std::uint32_t node : sampler_.draw(static_cast<std::uint32_t>(config_.alpha), rng)) {
      replaced_tag_[node] = tag_;
    }
    bool hit = false;
    for (const std::uint32_t node : sampler_.draw(q, rng)) {
      if (node < q && replaced_tag_[node] != tag_) {
        hit = true;
        break;
      }
    }
    if (!hit) ++tally.misses;
  }

 private:
  const TrialConfig& config_;
  DistinctSampler sampler_;
  std::vector<std::uint64_t> replaced_tag_;
  std::uint64_t tag_ = 0;
};

class ChurnWorker {
 public:
  explicit ChurnWorker(const TrialConfig& config)
      : config_(config),
        sampler_(static_cast<std::uint32_t>(config.n)),
        slots_(static_cast<std::size_t>(config.n)),
        per_unit_(replaced_count(config.n, config.c)) {}

  void run(std::int64_t trial, Tally& tally) {
    std::mt19937_64 rng(trial_seed(config_.seed, static_cast<std::uint64_t>(trial)));
    // slots_[i] is the initial id occupying slot i, or kFresh for a node that
    // joined after time zero.  Departed nodes never come back.
    for (std::size_t i = 0; i < slots_.size(); ++i) slots_[i] = static_cast<std::int64_t>(i);

    const double mean_per_unit = config_.c * static_cast<double>(config_.n);
    double carried = 0.0;
    for (std::int64_t unit = 0; unit < config_.delta; ++unit) {
      std::int64_t leaving = per_unit_;
      if (config_.fractional_churn) {
        carried += mean_per_unit;
        leaving = static_cast<std::int64_t>(std::floor(carried));
        carried -= static_cast<double>(leaving);
      }
      for (const std::uint32_t slot : sampler_.draw(static_cast<std::uint32_t>(leaving), rng)) {
        slots_[slot] = kFresh;
      }
    }

    std::int64_t initial_left = 0;
    std::int64_t core_left = 0;
    for (const std::int64_t id : slots_) {
      if (id == kFresh) continue;
      ++initial_left;
      if (id < config_.q) ++core_left;
    }
    tally.initial_sum += initial_left;
    tally.initial_sq += initial_left * initial_left;
    tally.core_sum += core_left;
    tally.core_sq += core_left * core_left;

    bool hit = false;
    for (const std::uint32_t slot : sampler_.draw(static_cast<std::uint32_t>(config_.q), rng)) {
      const std::int64_t id = slots_[slot];
      if (id != kFresh && id < config_.q) {
        hit = true;
        break;
      }
    }
    if (!hit) ++tally.misses;
  }

 private:
  static constexpr std::int64_t kFresh = -1;

  const TrialConfig& config_;
  DistinctSampler sampler_;
  std::vector<std::int64_t> slots_;
  std::int64_t per_unit_;
};

template <typename Worker>
Tally run_parallel(const TrialConfig& config) {
  const unsigned threads = resolve_threads(config);
  std::vector<Tally> partial(threads);
  auto run_chunk = [&](unsigned index) {
    const std::int64_t begin = config.trials * index / threads;
    const std::int64_t end = config.trials * (index + 1) / threads;
    Worker worker(config);
    for (std::int64_t t = begin; t < end; ++t) worker.run(t, partial[index]);
  };
  if (threads == 1) {
    run_chunk(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(run_chunk, i);
  }
  Tally total;
  for (const Tally& t : partial) total += t;
  return total;
}

TrialReport summarize(const TrialConfig& config, const Tally& tally) {
  TrialReport report;
  report.trials = config.trials;
  report.misses = tally.misses;
  report.epsilon_hat = static_cast<double>(tally.misses) / static_cast<double>(config.trials);
  const Interval ci = wilson_interval(tally.misses, config.trials);
  report.ci_low = std::min(ci.low, report.epsilon_hat);
  report.ci_high = std::max(ci.high, report.epsilon_hat);
  return report;
}

void require_model(const TrialConfig& config, TrialModel expected) {
  if (config.model != expected) {
    throw DomainError(fmt::format("configuration is for the {} model, expected {}", to_string(config.model),
                                  to_string(expected)));
  }
}

// Population statistics from integer sums: mean and sample standard deviation.
std::pair<double, double> moments(std::int64_t sum, std::int64_t sum_sq, std::int64_t count, double scale) {
  const double mean = static_cast<double>(sum) / static_cast<double>(count);
  if (count < 2) return {mean * scale, 0.0};
  // Exact integer numerator: count * sum_sq - sum^2.
  __extension__ using Wide = __int128;
  const Wide spread = static_cast<Wide>(count) * sum_sq - static_cast<Wide>(sum) * sum;
  const double variance =
      static_cast<double>(spread) / (static_cast<double>(count) * static_cast<double>(count - 1));
  return {mean * scale, std::sqrt(std::max(0.0, variance)) * scale};
}

}  // namespace

const char* to_string(TrialModel model) {
  return model == TrialModel::urn ? "urn" : "churn_process";
}

void TrialConfig::validate() const {
  if (n < 1 || n > static_cast<std::int64_t>(UINT32_MAX)) throw DomainError(fmt::format("n out of range (got {})", n));
  if (q < 0 || q > n) throw DomainError(fmt::format("q must lie in [0, n={}] (got {})", n, q));
  if (trials < 1) throw DomainError(fmt::format("trials must be >= 1 (got {})", trials));
  if (model == TrialModel::urn) {
    if (alpha < 0 || alpha > n) throw DomainError(fmt::format("alpha must lie in [0, n={}] (got {})", n, alpha));
  } else {
    if (!(c >= 0.0 && c < 1.0)) throw DomainError(fmt::format("churn rate c must lie in [0, 1) (got {})", c));
    if (delta < 0) throw DomainError(fmt::format("delta must be >= 0 (got {})", delta));
  }
}

Interval wilson_interval(std::int64_t successes, std::int64_t trials, double z) {
  if (trials < 1) throw DomainError("Wilson interval needs at least one trial");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z / denom * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(splitmix64(seed) ^ splitmix64(index + 1));
}

DistinctSampler::DistinctSampler(std::uint32_t n) : perm_(n) {
  for (std::uint32_t i = 0; i < n; ++i) perm_[i] = i;
}

std::span<const std::uint32_t> DistinctSampler::draw(std::uint32_t k, std::mt19937_64& rng) {
  const auto n = static_cast<std::uint32_t>(perm_.size());
  if (k > n) throw DomainError(fmt::format("cannot draw {} distinct values from {}", k, n));
  swaps_.resize(k);
  out_.resize(k);
  for (std::uint32_t i = 0; i < k; ++i) {
    const std::uint32_t j = std::uniform_int_distribution<std::uint32_t>(i, n - 1)(rng);
    std::swap(perm_[i], perm_[j]);
    swaps_[i] = j;
    out_[i] = perm_[i];
  }
  for (std::uint32_t i = k; i-- > 0;) std::swap(perm_[i], perm_[swaps_[i]]);
  return out_;
}

TrialReport run_urn_trials(const TrialConfig& config) {
  require_model(config, TrialModel::urn);
  config.validate();
  return summarize(config, run_parallel<UrnWorker>(config));
}

TrialReport run_churn_trials(const TrialConfig& config) {
  require_model(config, TrialModel::churn_process);
  config.validate();
  const Tally tally = run_parallel<ChurnWorker>(config);
  TrialReport report = summarize(config, tally);
  SurvivorStats stats;
  std::tie(stats.core_mean, stats.core_stddev) = moments(tally.core_sum, tally.core_sq, config.trials, 1.0);
  std::tie(stats.initial_fraction_mean, stats.initial_fraction_stddev) =
      moments(tally.initial_sum, tally.initial_sq, config.trials, 1.0 / static_cast<double>(config.n));
  stats.replaced_per_unit = config.fractional_churn ? 0 : replaced_count(config.n, config.c);
  report.survivors = stats;
  return report;
}

TrialReport run_trials(const TrialConfig& config) {
  return config.model == TrialModel::urn ? run_urn_trials(config) : run_churn_trials(config);
}

AnalyticComparison compare_with_analytic(const TrialConfig& config) {
  config.validate();
  AnalyticComparison out;
  if (config.model == TrialModel::urn) {
    out.alpha = config.alpha;
    out.ratio_C = static_cast<double>(config.alpha) / static_cast<double>(config.n);
  } else {
    out.ratio_C = churn_ratio(config.c, config.delta);
    out.alpha = replaced_count(config.n, out.ratio_C);
  }
  out.report = run_trials(config);
  out.analytic = miss_probability(config.n, out.alpha, {config.q, std::nullopt});

  const double eps = out.analytic.epsilon();
  const double se = std::sqrt(eps * (1.0 - eps) / static_cast<double>(config.trials));
  const double diff = out.report.epsilon_hat - eps;
  if (se > 0.0) {
    out.z_score = diff / se;
  } else {
    out.z_score = diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
  }
  out.flagged = std::abs(out.z_score) > kZScoreThreshold;
  return out;
}

}  // namespace persist
