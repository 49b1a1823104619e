// Binomial coefficients and summation in exact big-rational and log-space form.
//
// Every analytic quantity in this library is a ratio of products of binomial
// coefficients.  The exact path keeps them as GMP integers/rationals; the
// log-space path keeps natural logarithms in doubles so that populations of
// 10^5 and beyond stay representable.

#ifndef PERSIST_COMBINATORICS_HPP
#define PERSIST_COMBINATORICS_HPP

#include <cstdint>
#include <limits>
#include <span>

#include <boost/multiprecision/gmp.hpp>

namespace persist {

using BigInt = boost::multiprecision::mpz_int;
/// Always held in canonical form: gcd(num, den) = 1 and den > 0.
using ExactRational = boost::multiprecision::mpq_rational;

/// Natural logarithm of a nonnegative real.  Zero is represented by
/// value() == -inf and is absorbing under multiplication.
class LogReal {
 public:
  constexpr LogReal() = default;

  static constexpr LogReal zero() { return LogReal{}; }
  static constexpr LogReal one() { return from_log(0.0); }
  static constexpr LogReal from_log(double log_value) {
    LogReal r;
    r.log_ = log_value;
    return r;
  }
  /// x must be >= 0.
  static LogReal from_linear(double x);

  constexpr double log() const { return log_; }
  constexpr bool is_zero() const {
    return log_ == -std::numeric_limits<double>::infinity();
  }
  double linear() const;

  friend constexpr LogReal operator*(LogReal a, LogReal b) {
    if (a.is_zero() || b.is_zero()) return zero();
    return from_log(a.log_ + b.log_);
  }
  /// b must be nonzero.
  friend constexpr LogReal operator/(LogReal a, LogReal b) {
    if (a.is_zero()) return zero();
    return from_log(a.log_ - b.log_);
  }
  friend constexpr bool operator==(LogReal, LogReal) = default;
  friend constexpr auto operator<=>(LogReal a, LogReal b) { return a.log_ <=> b.log_; }

 private:
  double log_ = -std::numeric_limits<double>::infinity();
};

/// C(m, r) for m >= 0; zero when r < 0 or r > m.
BigInt binomial_exact(std::int64_t m, std::int64_t r);

/// ln C(m, r) for m >= 0; LogReal::zero() when r < 0 or r > m.
///
/// Evaluated as r ln(m/r) + s ln(m/s) + 0.5 ln(m / (2 pi r s)) plus Stirling
/// remainders, with s = m - r.  The two leading terms are nonnegative, so
/// the result carries a relative error of a few ulp even when m is large
/// and r is tiny.  Stirling remainders use a tabulated value for k <= 15
/// and the asymptotic series through k^-9 above it (truncation < 1e-16).
LogReal ln_binomial(std::int64_t m, std::int64_t r);

/// ln(k!) through the same remainder machinery as ln_binomial.
double ln_factorial(std::int64_t k);

/// Stirling remainder ln(k!) - (k ln k - k + 0.5 ln(2 pi k)), k >= 1.
double stirling_remainder(std::int64_t k);

/// log(sum(exp(terms))) with max-shifting; empty input gives zero.
LogReal log_sum_exp(std::span<const LogReal> terms);

/// Streaming form of log_sum_exp for sums whose terms are produced one at a
/// time.  The running maximum is rescaled on growth so no term overflows.
class LogSumAccumulator {
 public:
  void add(LogReal term);
  LogReal result() const;

 private:
  double max_ = -std::numeric_limits<double>::infinity();
  double scaled_sum_ = 0.0;
};

/// Natural logarithm of a positive big integer (zero maps to LogReal::zero()).
LogReal ln_of(const BigInt& x);
/// Natural logarithm of a nonnegative rational.
LogReal ln_of(const ExactRational& x);

}  // namespace persist

#endif  // PERSIST_COMBINATORICS_HPP
