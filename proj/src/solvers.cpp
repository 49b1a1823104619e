#include "persist/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "persist/errors.hpp"

namespace persist {

namespace {

// Compared as log-survival: delta*ln(1-c) >= ln(1-C), with slack.  Unlike C
// itself, the left side is unbounded, so the tolerance cannot admit every delta
// when C is within rounding of 1.
bool within_budget(double c, std::int64_t delta, double budget) {
  return static_cast<double>(delta) * std::log1p(-c) >= std::log1p(-budget) * (1.0 + kBoundaryRelTol);
}

void require_open_unit(const char* name, double x) {
  if (!(x > 0.0 && x < 1.0)) throw DomainError(fmt::format("{} must lie in (0, 1) (got {})", name, x));
}

}  // namespace

TuningTarget::TuningTarget(ExactRational epsilon_max)
    : epsilon_max_(std::move(epsilon_max)), epsilon_double_(epsilon_max_.convert_to<double>()) {}

TuningTarget TuningTarget::from_epsilon(const ExactRational& epsilon_max) {
  if (epsilon_max <= 0 || epsilon_max >= 1) {
    throw DomainError(fmt::format("target miss probability must lie in (0, 1) (got {})", epsilon_max.str()));
  }
  return TuningTarget(epsilon_max);
}

TuningTarget TuningTarget::from_p(const ExactRational& p_min) {
  return from_epsilon(ExactRational(1) - p_min);
}

TuningTarget TuningTarget::from_epsilon(double epsilon_max) {
  if (!(epsilon_max > 0.0 && epsilon_max < 1.0)) {
    throw DomainError(fmt::format("target miss probability must lie in (0, 1) (got {})", epsilon_max));
  }
  return TuningTarget(ExactRational(epsilon_max));
}

bool TuningTarget::is_met_by(const MissProbability& value) const {
  if (value.exact) return *value.exact <= epsilon_max_;
  return value.log_epsilon.log() <= std::log(epsilon_double_);
}

CoreSizeResult min_core_size(std::int64_t n, std::int64_t alpha, const TuningTarget& target,
                             std::optional<NumericMode> mode) {
  if (n < 1) throw DomainError(fmt::format("population n must be >= 1 (got {})", n));
  if (alpha < 0 || alpha > n) throw DomainError(fmt::format("alpha must lie in [0, n={}] (got {})", n, alpha));
  const NumericMode numeric = mode.value_or(default_mode(n));
  auto eval = [&](std::int64_t q) { return miss_probability(n, alpha, {q, numeric}); };

  MissProbability at_full = eval(n);
  if (!target.is_met_by(at_full)) {
    throw InfeasibleError(fmt::format("no core size meets eps <= {} with alpha={} of n={} nodes replaced",
                                      target.epsilon_max_double(), alpha, n));
  }

  // Invariant: eval(rejected) misses the target, eval(accepted) meets it.
  std::int64_t rejected = 0;  // q = 0 gives eps = 1
  std::int64_t accepted = n;
  std::optional<MissProbability> accepted_value;
  for (std::int64_t probe = 1; probe < n; probe *= 2) {
    MissProbability value = eval(probe);
    if (target.is_met_by(value)) {
      accepted = probe;
      accepted_value = std::move(value);
      break;
    }
    rejected = probe;
  }
  if (!accepted_value) accepted_value = std::move(at_full);

  while (accepted - rejected > 1) {
    const std::int64_t mid = rejected + (accepted - rejected) / 2;
    MissProbability value = eval(mid);
    if (target.is_met_by(value)) {
      accepted = mid;
      accepted_value = std::move(value);
    } else {
      rejected = mid;
    }
  }

  CoreSizeResult out;
  out.q = accepted;
  out.at_q = std::move(*accepted_value);
  if (accepted > 0) out.at_predecessor = eval(accepted - 1);
  return out;
}

SpanResult delta_for_churn(double c, double ratio_C_max) {
  require_open_unit("churn rate c", c);
  require_open_unit("churn ratio C", ratio_C_max);
  const double estimate = std::floor(std::log1p(-ratio_C_max) / std::log1p(-c));
  auto delta = static_cast<std::int64_t>(std::max(0.0, estimate));
  while (within_budget(c, delta + 1, ratio_C_max)) ++delta;
  while (delta > 0 && !within_budget(c, delta, ratio_C_max)) --delta;
  return {delta, churn_ratio(c, delta), churn_ratio(c, delta + 1)};
}

double churn_rate_for(double ratio_C, std::int64_t delta) {
  require_open_unit("churn ratio C", ratio_C);
  if (delta < 1) throw DomainError(fmt::format("delta must be >= 1 (got {})", delta));
  return -std::expm1(std::log1p(-ratio_C) / static_cast<double>(delta));
}

MaxSpanResult max_delta(std::int64_t n, std::int64_t q, double c, const TuningTarget& target,
                        std::int64_t horizon, std::optional<NumericMode> mode) {
  if (n < 1) throw DomainError(fmt::format("population n must be >= 1 (got {})", n));
  if (q < 1 || q > n) throw DomainError(fmt::format("q must lie in [1, n={}] (got {})", n, q));
  require_open_unit("churn rate c", c);
  if (horizon < 1) throw DomainError(fmt::format("horizon must be >= 1 (got {})", horizon));
  const NumericMode numeric = mode.value_or(default_mode(n));

  auto alpha_at = [&](std::int64_t delta) { return replaced_count(n, churn_ratio(c, delta)); };
  auto eval = [&](std::int64_t delta) { return miss_probability(n, alpha_at(delta), {q, numeric}); };

  MissProbability at_static = eval(0);
  if (!target.is_met_by(at_static)) {
    throw InfeasibleError(fmt::format("core of q={} misses eps <= {} even without churn (eps={})", q,
                                      target.epsilon_max_double(), at_static.epsilon()));
  }

  // eps depends on delta only through alpha, which is non-decreasing in delta.
  std::int64_t accepted = 0;
  MissProbability accepted_value = std::move(at_static);
  std::optional<std::int64_t> rejected;
  for (std::int64_t probe = 1;; probe = std::min(probe * 2, horizon)) {
    MissProbability value = eval(probe);
    if (!target.is_met_by(value)) {
      rejected = probe;
      break;
    }
    accepted = probe;
    accepted_value = std::move(value);
    if (probe == horizon) break;
  }

  MaxSpanResult out;
  if (!rejected) {
    out.delta = horizon;
    out.unbounded = true;
    out.alpha_at_delta = alpha_at(horizon);
    out.at_delta = std::move(accepted_value);
    return out;
  }

  while (*rejected - accepted > 1) {
    const std::int64_t mid = accepted + (*rejected - accepted) / 2;
    MissProbability value = eval(mid);
    if (target.is_met_by(value)) {
      accepted = mid;
      accepted_value = std::move(value);
    } else {
      rejected = mid;
    }
  }
  out.delta = accepted;
  out.alpha_at_delta = alpha_at(accepted);
  out.at_delta = std::move(accepted_value);
  out.alpha_at_next = alpha_at(accepted + 1);
  out.at_next = eval(accepted + 1);
  return out;
}

}  // namespace persist
