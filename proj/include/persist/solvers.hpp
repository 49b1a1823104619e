// Inverse problems: smallest core for a miss budget, longest observation span
// for a churn budget, and the churn rate that produces a given ratio.
//
// Integer solvers return the value found together with the quantity evaluated
// at the adjacent rejected point, so every answer can be re-checked without
// trusting the search.

#ifndef PERSIST_SOLVERS_HPP
#define PERSIST_SOLVERS_HPP

#include <cstdint>
#include <optional>

#include "persist/persistence.hpp"

namespace persist {

/// Upper bound on the accepted miss probability, kept exact so that
/// "99.9%" compares as 1/1000 in exact mode.
class TuningTarget {
 public:
  /// Throws DomainError unless 0 < epsilon_max < 1.
  static TuningTarget from_epsilon(const ExactRational& epsilon_max);
  static TuningTarget from_p(const ExactRational& p_min);
  static TuningTarget from_epsilon(double epsilon_max);

  const ExactRational& epsilon_max() const { return epsilon_max_; }
  double epsilon_max_double() const { return epsilon_double_; }
  ExactRational p_min() const { return ExactRational(1) - epsilon_max_; }

  /// Exact comparison when the value carries an exact rational.
  bool is_met_by(const MissProbability& value) const;

 private:
  explicit TuningTarget(ExactRational epsilon_max);

  ExactRational epsilon_max_;
  double epsilon_double_ = 0.0;
};

struct CoreSizeResult {
  std::int64_t q = 0;
  MissProbability at_q;
  std::optional<MissProbability> at_predecessor;  ///< q-1, absent when q == 0
};

/// Smallest q with miss_probability(n, alpha, q) <= target, by doubling then
/// bisection over the monotone miss curve.  Throws InfeasibleError when q = n
/// still misses (alpha == n), DomainError for arguments out of range.
CoreSizeResult min_core_size(std::int64_t n, std::int64_t alpha, const TuningTarget& target,
                             std::optional<NumericMode> mode = std::nullopt);

struct SpanResult {
  std::int64_t delta = 0;
  double ratio_at_delta = 0.0;
  double ratio_at_next = 0.0;  ///< churn ratio at delta + 1, above the budget
};

/// Relative slack granted when re-checking a span boundary: a log-survival
/// delta*ln(1-c) that agrees with ln(1-C) to this precision meets the budget.
inline constexpr double kBoundaryRelTol = 1e-12;

/// Largest delta with churn_ratio(c, delta) <= ratio_C_max.  Both arguments
/// must lie in (0, 1).
SpanResult delta_for_churn(double c, double ratio_C_max);

/// 1 - (1 - ratio_C)^(1/delta); ratio_C in (0, 1), delta >= 1.
double churn_rate_for(double ratio_C, std::int64_t delta);

inline constexpr std::int64_t kDefaultSpanHorizon = 10'000'000;

struct MaxSpanResult {
  std::int64_t delta = 0;
  /// True when the target still holds at the horizon; delta is then the horizon.
  bool unbounded = false;
  std::int64_t alpha_at_delta = 0;
  MissProbability at_delta;
  std::optional<std::int64_t> alpha_at_next;
  std::optional<MissProbability> at_next;  ///< delta + 1, absent when unbounded
};

/// Largest delta such that a core of q nodes still meets the target after
/// delta units of churn at rate c.  Throws InfeasibleError when the static
/// system (delta = 0) already violates it.
MaxSpanResult max_delta(std::int64_t n, std::int64_t q, double c, const TuningTarget& target,
                        std::int64_t horizon = kDefaultSpanHorizon,
                        std::optional<NumericMode> mode = std::nullopt);

}  // namespace persist

#endif  // PERSIST_SOLVERS_HPP
