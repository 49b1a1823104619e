#include "persist/combinatorics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include <gmp.h>

namespace persist {

namespace {

constexpr std::int64_t kTabulatedRemainders = 15;

const std::array<double, kTabulatedRemainders + 1>& remainder_table() {
  static const auto table = [] {
    std::array<double, kTabulatedRemainders + 1> t{};
    t[0] = 0.0;
    for (std::int64_t k = 1; k <= kTabulatedRemainders; ++k) {
      const double x = static_cast<double>(k);
      t[k] = std::lgamma(x + 1.0) - (x * std::log(x) - x + 0.5 * std::log(2.0 * std::numbers::pi * x));
    }
    return t;
  }();
  return table;
}

// Neumaier-compensated accumulation of exp(term - shift).
double shifted_exp_sum(std::span<const LogReal> terms, double shift) {
  double sum = 0.0;
  double carry = 0.0;
  for (const LogReal t : terms) {
    if (t.is_zero()) continue;
    const double x = std::exp(t.log() - shift);
    const double s = sum + x;
    carry += std::abs(sum) >= std::abs(x) ? (sum - s) + x : (x - s) + sum;
    sum = s;
  }
  return sum + carry;
}

}  // namespace

LogReal LogReal::from_linear(double x) {
  if (x == 0.0) return zero();
  return from_log(std::log(x));
}

double LogReal::linear() const {
  return is_zero() ? 0.0 : std::exp(log_);
}

BigInt binomial_exact(std::int64_t m, std::int64_t r) {
  BigInt out;
  if (r < 0 || r > m) return out;
  mpz_bin_uiui(out.backend().data(), static_cast<unsigned long>(m), static_cast<unsigned long>(r));
  return out;
}

double stirling_remainder(std::int64_t k) {
  if (k <= kTabulatedRemainders) return remainder_table()[static_cast<std::size_t>(k)];
  const double x = static_cast<double>(k);
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // 1/12x - 1/360x^3 + 1/1260x^5 - 1/1680x^7 + 1/1188x^9
  return inv * (1.0 / 12.0 -
                inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0 - inv2 / 1188.0))));
}

double ln_factorial(std::int64_t k) {
  if (k <= 1) return 0.0;
  const double x = static_cast<double>(k);
  return x * std::log(x) - x + 0.5 * std::log(2.0 * std::numbers::pi * x) + stirling_remainder(k);
}

LogReal ln_binomial(std::int64_t m, std::int64_t r) {
  if (r < 0 || r > m) return LogReal::zero();
  if (r == 0 || r == m) return LogReal::one();
  const std::int64_t s = m - r;
  const double dm = static_cast<double>(m);
  const double dr = static_cast<double>(r);
  const double ds = static_cast<double>(s);
  const double entropy = dr * std::log1p(ds / dr) + ds * std::log1p(dr / ds);
  const double gaussian = 0.5 * std::log(dm / (dr * ds) / (2.0 * std::numbers::pi));
  const double remainder = stirling_remainder(m) - stirling_remainder(r) - stirling_remainder(s);
  return LogReal::from_log(entropy + gaussian + remainder);
}

LogReal log_sum_exp(std::span<const LogReal> terms) {
  double shift = -std::numeric_limits<double>::infinity();
  for (const LogReal t : terms) shift = std::max(shift, t.log());
  if (shift == -std::numeric_limits<double>::infinity()) return LogReal::zero();
  return LogReal::from_log(shift + std::log(shifted_exp_sum(terms, shift)));
}

void LogSumAccumulator::add(LogReal term) {
  if (term.is_zero()) return;
  if (term.log() > max_) {
    scaled_sum_ = scaled_sum_ * std::exp(max_ - term.log()) + 1.0;
    max_ = term.log();
  } else {
    scaled_sum_ += std::exp(term.log() - max_);
  }
}

LogReal LogSumAccumulator::result() const {
  if (scaled_sum_ == 0.0) return LogReal::zero();
  return LogReal::from_log(max_ + std::log(scaled_sum_));
}

LogReal ln_of(const BigInt& x) {
  if (x.is_zero()) return LogReal::zero();
  long exponent = 0;
  const double mantissa = mpz_get_d_2exp(&exponent, x.backend().data());
  return LogReal::from_log(std::log(std::abs(mantissa)) + static_cast<double>(exponent) * std::numbers::ln2);
}

LogReal ln_of(const ExactRational& x) {
  const BigInt num = boost::multiprecision::numerator(x);
  if (num.is_zero()) return LogReal::zero();
  // mpq_get_d is faithful while the quotient is a normal double; the
  // log-difference route loses absolute precision for huge operands.
  const double direct = mpq_get_d(x.backend().data());
  if (direct > 1e-290 && direct < 1e290) return LogReal::from_log(std::log(direct));
  return ln_of(num) / ln_of(boost::multiprecision::denominator(x));
}

}  // namespace persist
