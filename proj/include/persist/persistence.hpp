// Churn ratio, replacement count and the core miss probability.
//
// A system of n nodes replaces a fraction c of its members every time unit.
// After delta units a fraction C = 1 - (1-c)^delta of the initial nodes is
// gone, i.e. alpha = ceil(C n) of them.  A core of q initial nodes is probed
// with q uniformly chosen nodes; the probe misses when none of them is a
// surviving core member.  Conditioning on the number k of core nodes among
// the alpha replaced ones gives
//
//   eps = sum_{k=a..b} C(n-q+k, q) C(q, k) C(n-q, alpha-k) / (C(n, q) C(n, alpha))
//
// with a = max(0, alpha-n+q) and b = min(alpha, q).

#ifndef PERSIST_PERSISTENCE_HPP
#define PERSIST_PERSISTENCE_HPP

#include <cstdint>
#include <optional>

#include "persist/combinatorics.hpp"

namespace persist {

enum class NumericMode { exact, logspace };

/// Populations up to this size default to exact arithmetic.
inline constexpr std::int64_t kExactModeMaxN = 2000;

NumericMode default_mode(std::int64_t n);
const char* to_string(NumericMode mode);

struct SystemParams {
  std::int64_t n = 1;
  double c = 0.0;          ///< replaced fraction per time unit, in [0, 1)
  std::int64_t delta = 0;  ///< observation span in whole time units

  /// Throws DomainError unless n >= 1, 0 <= c < 1 and delta >= 0.
  void validate() const;
};

struct ChurnOutcome {
  double ratio_C = 0.0;
  std::int64_t alpha = 0;
};

struct ProbeQuery {
  std::int64_t q = 0;
  std::optional<NumericMode> mode;  ///< unset: default_mode(n)
};

struct MissProbability {
  std::int64_t n = 0;
  std::int64_t q = 0;
  std::int64_t alpha = 0;
  NumericMode mode = NumericMode::logspace;
  std::optional<ExactRational> exact;  ///< present in exact mode
  LogReal log_epsilon;

  double epsilon() const { return log_epsilon.linear(); }
  /// 1 - eps without cancellation for tiny eps.
  double p_hit() const;
  std::optional<ExactRational> exact_p_hit() const;
};

/// 1 - (1-c)^delta.  Throws DomainError for c outside [0, 1) or delta < 0.
double churn_ratio(double c, std::int64_t delta);

/// ceil(ratio_C * n) clamped to [0, n], with the product rounded once in
/// double precision before the ceiling.
std::int64_t replaced_count(std::int64_t n, double ratio_C);
/// Exact ceiling; use this whenever C was supplied as a decimal or percentage.
std::int64_t replaced_count(std::int64_t n, const ExactRational& ratio_C);

ChurnOutcome churn_outcome(const SystemParams& params);

/// Pr[beta = k] = C(q,k) C(n-q, alpha-k) / C(n, alpha).
/// Throws DomainError unless max(0, alpha-n+q) <= k <= min(alpha, q).
ExactRational hypergeometric_pmf(std::int64_t n, std::int64_t q, std::int64_t alpha, std::int64_t k);
LogReal ln_hypergeometric_pmf(std::int64_t n, std::int64_t q, std::int64_t alpha, std::int64_t k);

/// Miss probability given that k core members were replaced:
/// C(n-q+k, q) / C(n, q).  Requires 0 <= k <= q <= n.
ExactRational conditional_miss(std::int64_t n, std::int64_t q, std::int64_t k);
LogReal ln_conditional_miss(std::int64_t n, std::int64_t q, std::int64_t k);

/// Throws DomainError unless 0 <= q <= n and 0 <= alpha <= n.
MissProbability miss_probability(std::int64_t n, std::int64_t alpha, ProbeQuery query);
/// Derives alpha from the churn parameters.
MissProbability miss_probability(const SystemParams& params, ProbeQuery query);

}  // namespace persist

#endif  // PERSIST_PERSISTENCE_HPP
