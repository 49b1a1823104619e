#include "persist/persistence.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "persist/errors.hpp"

namespace persist {

namespace {

void require_population(std::int64_t n) {
  if (n < 1) throw DomainError(fmt::format("population n must be >= 1 (got {})", n));
}

void require_in_population(const char* name, std::int64_t value, std::int64_t n) {
  if (value < 0 || value > n) {
    throw DomainError(fmt::format("{} must lie in [0, n={}] (got {})", name, n, value));
  }
}

struct SupportBounds {
  std::int64_t lo;
  std::int64_t hi;
};

SupportBounds beta_support(std::int64_t n, std::int64_t q, std::int64_t alpha) {
  return {std::max<std::int64_t>(0, alpha - n + q), std::min(alpha, q)};
}

void require_in_support(std::int64_t n, std::int64_t q, std::int64_t alpha, std::int64_t k) {
  require_population(n);
  require_in_population("q", q, n);
  require_in_population("alpha", alpha, n);
  const auto [lo, hi] = beta_support(n, q, alpha);
  if (k < lo || k > hi) {
    throw DomainError(fmt::format("k={} outside hypergeometric support [{}, {}]", k, lo, hi));
  }
}

void require_conditional_args(std::int64_t n, std::int64_t q, std::int64_t k) {
  require_population(n);
  require_in_population("q", q, n);
  if (k < 0 || k > q) throw DomainError(fmt::format("k must lie in [0, q={}] (got {})", q, k));
}

}  // namespace

NumericMode default_mode(std::int64_t n) {
  return n <= kExactModeMaxN ? NumericMode::exact : NumericMode::logspace;
}

const char* to_string(NumericMode mode) {
  return mode == NumericMode::exact ? "exact" : "logspace";
}

void SystemParams::validate() const {
  require_population(n);
  if (!(c >= 0.0 && c < 1.0)) throw DomainError(fmt::format("churn rate c must lie in [0, 1) (got {})", c));
  if (delta < 0) throw DomainError(fmt::format("delta must be >= 0 (got {})", delta));
}

double MissProbability::p_hit() const {
  if (log_epsilon.is_zero()) return 1.0;
  return -std::expm1(log_epsilon.log());
}

std::optional<ExactRational> MissProbability::exact_p_hit() const {
  if (!exact) return std::nullopt;
  return ExactRational(1) - *exact;
}

double churn_ratio(double c, std::int64_t delta) {
  if (!(c >= 0.0 && c < 1.0)) throw DomainError(fmt::format("churn rate c must lie in [0, 1) (got {})", c));
  if (delta < 0) throw DomainError(fmt::format("delta must be >= 0 (got {})", delta));
  if (delta == 0 || c == 0.0) return 0.0;
  return -std::expm1(static_cast<double>(delta) * std::log1p(-c));
}

std::int64_t replaced_count(std::int64_t n, double ratio_C) {
  require_population(n);
  if (!(ratio_C >= 0.0 && ratio_C <= 1.0)) {
    throw DomainError(fmt::format("churn ratio C must lie in [0, 1] (got {})", ratio_C));
  }
  const auto alpha = static_cast<std::int64_t>(std::ceil(ratio_C * static_cast<double>(n)));
  return std::clamp<std::int64_t>(alpha, 0, n);
}

std::int64_t replaced_count(std::int64_t n, const ExactRational& ratio_C) {
  require_population(n);
  if (ratio_C < 0 || ratio_C > 1) throw DomainError("churn ratio C must lie in [0, 1]");
  const ExactRational scaled = ratio_C * n;
  const BigInt num = boost::multiprecision::numerator(scaled);
  const BigInt den = boost::multiprecision::denominator(scaled);
  BigInt ceiling = num / den;
  if (ceiling * den != num) ceiling += 1;  // num >= 0, so truncation is the floor
  return std::clamp<std::int64_t>(ceiling.convert_to<std::int64_t>(), 0, n);
}

ChurnOutcome churn_outcome(const SystemParams& params) {
  params.validate();
  ChurnOutcome out;
  out.ratio_C = churn_ratio(params.c, params.delta);
  out.alpha = replaced_count(params.n, out.ratio_C);
  return out;
}

ExactRational hypergeometric_pmf(std::int64_t n, std::int64_t q, std::int64_t alpha, std::int64_t k) {
  require_in_support(n, q, alpha, k);
  return ExactRational(binomial_exact(q, k) * binomial_exact(n - q, alpha - k), binomial_exact(n, alpha));
}

LogReal ln_hypergeometric_pmf(std::int64_t n, std::int64_t q, std::int64_t alpha, std::int64_t k) {
  require_in_support(n, q, alpha, k);
  return ln_binomial(q, k) * ln_binomial(n - q, alpha - k) / ln_binomial(n, alpha);
}

ExactRational conditional_miss(std::int64_t n, std::int64_t q, std::int64_t k) {
  require_conditional_args(n, q, k);
  return ExactRational(binomial_exact(n - q + k, q), binomial_exact(n, q));
}

LogReal ln_conditional_miss(std::int64_t n, std::int64_t q, std::int64_t k) {
  require_conditional_args(n, q, k);
  return ln_binomial(n - q + k, q) / ln_binomial(n, q);
}

MissProbability miss_probability(std::int64_t n, std::int64_t alpha, ProbeQuery query) {
  require_population(n);
  require_in_population("q", query.q, n);
  require_in_population("alpha", alpha, n);
  const std::int64_t q = query.q;

  MissProbability out;
  out.n = n;
  out.q = q;
  out.alpha = alpha;
  out.mode = query.mode.value_or(default_mode(n));

  const auto [lo, hi] = beta_support(n, q, alpha);
  if (out.mode == NumericMode::exact) {
    BigInt numerator;
    for (std::int64_t k = lo; k <= hi; ++k) {
      BigInt probe_misses = binomial_exact(n - q + k, q);
      if (probe_misses.is_zero()) continue;
      numerator += probe_misses * binomial_exact(q, k) * binomial_exact(n - q, alpha - k);
    }
    out.exact = ExactRational(numerator, binomial_exact(n, q) * binomial_exact(n, alpha));
    out.log_epsilon = ln_of(*out.exact);
    return out;
  }

  std::vector<LogReal> terms;
  terms.reserve(static_cast<std::size_t>(hi - lo + 1));
  for (std::int64_t k = lo; k <= hi; ++k) {
    terms.push_back(ln_binomial(n - q + k, q) * ln_binomial(q, k) * ln_binomial(n - q, alpha - k));
  }
  out.log_epsilon = log_sum_exp(terms) / (ln_binomial(n, q) * ln_binomial(n, alpha));
  // Rounding may push a certain miss marginally above 1.
  if (out.log_epsilon.log() > 0.0) out.log_epsilon = LogReal::one();
  return out;
}

MissProbability miss_probability(const SystemParams& params, ProbeQuery query) {
  const ChurnOutcome churn = churn_outcome(params);
  return miss_probability(params.n, churn.alpha, query);
}

}  // namespace persist
