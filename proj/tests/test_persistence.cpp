#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "persist/errors.hpp"
#include "persist/persistence.hpp"

using namespace persist;

namespace {

ExactRational exact_eps(std::int64_t n, std::int64_t alpha, std::int64_t q) {
  return *miss_probability(n, alpha, {q, NumericMode::exact}).exact;
}

double log_eps(std::int64_t n, std::int64_t alpha, std::int64_t q) {
  return miss_probability(n, alpha, {q, NumericMode::logspace}).log_epsilon.log();
}

}  // namespace

TEST_CASE("churn_ratio") {
  CHECK(churn_ratio(0.2, 1) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(churn_ratio(0.37, 0) == 0.0);
  CHECK(churn_ratio(0.0, 500) == 0.0);
  const double want = oracle::churn_ratio_exact(ExactRational(1, 1000), 105).convert_to<double>();
  CHECK(churn_ratio(1e-3, 105) == doctest::Approx(want).epsilon(1e-13));
  CHECK(std::round(churn_ratio(1e-3, 105) * 100.0) == 10.0);
  CHECK_THROWS_AS(churn_ratio(1.0, 3), DomainError);
  CHECK_THROWS_AS(churn_ratio(-0.1, 3), DomainError);
  CHECK_THROWS_AS(churn_ratio(0.1, -1), DomainError);
}

TEST_CASE("churn_ratio monotonicity and multiplicativity") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> rate(0.0, 0.5);
  std::uniform_int_distribution<std::int64_t> span(0, 2000);
  for (int i = 0; i < 2000; ++i) {
    const double c = rate(rng);
    const std::int64_t d1 = span(rng);
    const std::int64_t d2 = span(rng);
    const double joined = 1.0 - (1.0 - churn_ratio(c, d1)) * (1.0 - churn_ratio(c, d2));
    CHECK(std::abs(churn_ratio(c, d1 + d2) - joined) <= 1e-12);
    CHECK(churn_ratio(c, d1 + 1) >= churn_ratio(c, d1));
    CHECK(churn_ratio(std::min(0.999, c + 0.01), d1) >= churn_ratio(c, d1));
  }
}

TEST_CASE("replaced_count") {
  CHECK(replaced_count(10000, ExactRational(1, 10)) == 1000);
  CHECK(replaced_count(10000, 0.10) == 1000);
  CHECK(replaced_count(10000, ExactRational(3, 10)) == 3000);
  CHECK(replaced_count(77, 0.0) == 0);
  CHECK(replaced_count(1000, 0.001 * 0.1) == 1);
  CHECK(replaced_count(1000, ExactRational(1, 10000)) == 1);
  CHECK(replaced_count(7, ExactRational(1)) == 7);
  CHECK(replaced_count(3, ExactRational(1, 3)) == 1);
  CHECK(replaced_count(3, ExactRational(1, 3) + ExactRational(1, 1000000)) == 2);
  CHECK_THROWS_AS(replaced_count(10, 1.5), DomainError);
  CHECK_THROWS_AS(replaced_count(0, 0.5), DomainError);
}

TEST_CASE("churn_outcome ties the two together") {
  const ChurnOutcome out = churn_outcome({10000, 1e-3, 105});
  CHECK(out.ratio_C == doctest::Approx(0.0997228).epsilon(1e-6));
  CHECK(out.alpha == 998);
  CHECK(churn_outcome({5, 0.2, 1}).alpha == 1);
  CHECK_THROWS_AS(churn_outcome({0, 0.1, 1}), DomainError);
}

TEST_CASE("hypergeometric_pmf") {
  CHECK(hypergeometric_pmf(5, 2, 2, 0) == ExactRational(3, 10));
  for (std::int64_t n : {1, 4, 17}) {
    for (std::int64_t q = 0; q <= n; ++q) CHECK(hypergeometric_pmf(n, q, 0, 0) == 1);
  }
  ExactRational total = 0;
  for (int k = 0; k <= 2; ++k) {
    const ExactRational pmf = hypergeometric_pmf(6, 3, 2, k);
    CHECK(pmf == oracle::overlap_pmf(6, 3, 2, k));
    total += pmf;
  }
  CHECK(total == 1);
  CHECK(ln_hypergeometric_pmf(6, 3, 2, 1).linear() == doctest::Approx(0.6).epsilon(1e-14));
  // support is [max(0, alpha-n+q), min(alpha, q)] = [1, 3] here
  CHECK_THROWS_AS(hypergeometric_pmf(5, 3, 3, 0), DomainError);
  CHECK_THROWS_AS(hypergeometric_pmf(5, 3, 3, 4), DomainError);
  CHECK_THROWS_AS(ln_hypergeometric_pmf(5, 3, 3, 0), DomainError);
  CHECK(hypergeometric_pmf(5, 3, 3, 3) == ExactRational(1, 10));
}

TEST_CASE("hypergeometric pmf normalizes for n <= 30") {
  for (std::int64_t n = 1; n <= 30; ++n) {
    for (std::int64_t q = 0; q <= n; ++q) {
      for (std::int64_t alpha = 0; alpha <= n; ++alpha) {
        ExactRational total = 0;
        for (std::int64_t k = std::max<std::int64_t>(0, alpha - n + q); k <= std::min(alpha, q); ++k) {
          total += hypergeometric_pmf(n, q, alpha, k);
        }
        REQUIRE(total == 1);
      }
    }
  }
}

TEST_CASE("conditional_miss") {
  CHECK(conditional_miss(5, 1, 0) == ExactRational(4, 5));
  for (std::int64_t q = 0; q <= 9; ++q) CHECK(conditional_miss(9, q, q) == 1);
  CHECK(conditional_miss(7, 3, 1) == ExactRational(10, 35));
  // Exhaustive: probes of size 3 from 7 that avoid the 2 surviving core nodes.
  std::int64_t avoid = 0;
  const auto draws = oracle::subsets(7, 3);
  for (const std::uint32_t d : draws) avoid += (d & 0b11U) == 0;
  CHECK(conditional_miss(7, 3, 1) == ExactRational(avoid, static_cast<std::int64_t>(draws.size())));
  CHECK_THROWS_AS(conditional_miss(5, 2, 3), DomainError);
  CHECK_THROWS_AS(conditional_miss(5, 6, 0), DomainError);
}

TEST_CASE("conditional_miss equals the sequential-draw product form for n <= 200") {
  for (std::int64_t n = 1; n <= 200; n += (n < 40 ? 1 : 7)) {
    for (std::int64_t q = 0; q <= n; ++q) {
      for (std::int64_t k = 0; k <= q; k += (q < 30 ? 1 : 5)) {
        const ExactRational cm = conditional_miss(n, q, k);
        REQUIRE(cm == oracle::conditional_miss_product(n, q, k));
        const double product = oracle::conditional_miss_product_float(n, q, k);
        const LogReal lcm = ln_conditional_miss(n, q, k);
        REQUIRE(std::abs(lcm.linear() - product) <= 1e-12);
      }
    }
  }
}

TEST_CASE("miss_probability small cases") {
  CHECK(exact_eps(5, 0, 1) == ExactRational(4, 5));
  CHECK(exact_eps(6, 3, 2) == oracle::urn_miss_ordered(6, 2, 3));
  CHECK(exact_eps(6, 3, 2) == oracle::urn_miss(6, 2, 3));
  CHECK(exact_eps(6, 3, 2) == ExactRational(17, 25));

  // Empty probe set always misses.
  CHECK(exact_eps(10, 4, 0) == 1);
  CHECK(miss_probability(10, 4, {0, NumericMode::logspace}).epsilon() == 1.0);
  // Probing everyone finds a survivor unless all were replaced.
  CHECK(exact_eps(10, 9, 10) == 0);
  CHECK(miss_probability(10, 9, {10, NumericMode::logspace}).log_epsilon.is_zero());
  CHECK(exact_eps(10, 10, 10) == 1);
}

TEST_CASE("full churn makes the miss certain") {
  for (std::int64_t n = 2; n <= 40; ++n) {
    for (std::int64_t q = 1; q < n; ++q) {
      REQUIRE(exact_eps(n, n, q) == 1);
      REQUIRE(miss_probability(n, n, {q, NumericMode::logspace}).epsilon() == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("static reduction to C(n-q, q) / C(n, q)") {
  const oracle::PascalTriangle pascal(80);
  for (std::int64_t n = 1; n <= 80; ++n) {
    for (std::int64_t q = 0; q <= n; ++q) {
      REQUIRE(exact_eps(n, 0, q) == ExactRational(pascal(n - q, q), pascal(n, q)));
    }
  }
}

TEST_CASE("miss_probability matches the static anchor for n = 10^4") {
  const auto at = [](std::int64_t q) { return miss_probability(10000, 0, {q, std::nullopt}); };
  CHECK(at(213).mode == NumericMode::logspace);
  CHECK(at(213).epsilon() <= 0.01);
  CHECK(at(212).epsilon() > 0.01);
}

TEST_CASE("exact and logspace modes agree for n <= 500") {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 300; ++i) {
    const std::int64_t n = std::uniform_int_distribution<std::int64_t>(1, 500)(rng);
    const std::int64_t q = std::uniform_int_distribution<std::int64_t>(0, n)(rng);
    const std::int64_t alpha = std::uniform_int_distribution<std::int64_t>(0, n)(rng);
    const MissProbability exact = miss_probability(n, alpha, {q, NumericMode::exact});
    const MissProbability logs = miss_probability(n, alpha, {q, NumericMode::logspace});
    INFO("n=" << n << " q=" << q << " alpha=" << alpha);
    REQUIRE(exact.log_epsilon.is_zero() == logs.log_epsilon.is_zero());
    if (!exact.log_epsilon.is_zero()) {
      REQUIRE(std::abs(std::expm1(logs.log_epsilon.log() - exact.log_epsilon.log())) <= 1e-10);
    }
  }
}

TEST_CASE("epsilon monotone in q and alpha at n = 10^4 (sampled)") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 60; ++i) {
    const std::int64_t alpha = std::uniform_int_distribution<std::int64_t>(0, 9999)(rng);
    const std::int64_t q = std::uniform_int_distribution<std::int64_t>(1, 600)(rng);
    INFO("alpha=" << alpha << " q=" << q);
    CHECK(log_eps(10000, alpha, q + 1) <= log_eps(10000, alpha, q));
    CHECK(log_eps(10000, alpha + 1, q) >= log_eps(10000, alpha, q));
  }
}

TEST_CASE("p_hit and exact complements") {
  const MissProbability mp = miss_probability(6, 3, {2, NumericMode::exact});
  CHECK(*mp.exact_p_hit() == ExactRational(8, 25));
  CHECK(mp.p_hit() + mp.epsilon() == doctest::Approx(1.0).epsilon(1e-15));
  const MissProbability tiny = miss_probability(100000, 0, {5000, NumericMode::logspace});
  CHECK(tiny.epsilon() < 1e-100);
  CHECK(tiny.p_hit() == 1.0);
  CHECK_FALSE(tiny.exact_p_hit().has_value());
}

TEST_CASE("miss_probability domain errors") {
  CHECK_THROWS_AS(miss_probability(10, 0, {11, std::nullopt}), DomainError);
  CHECK_THROWS_AS(miss_probability(10, 11, {3, std::nullopt}), DomainError);
  CHECK_THROWS_AS(miss_probability(10, -1, {3, std::nullopt}), DomainError);
  CHECK_THROWS_AS(miss_probability(0, 0, {0, std::nullopt}), DomainError);
}

TEST_CASE("default numeric mode switches above n = 2000") {
  CHECK(default_mode(2000) == NumericMode::exact);
  CHECK(default_mode(2001) == NumericMode::logspace);
  CHECK(miss_probability(SystemParams{1000, 1e-2, 10}, {50, std::nullopt}).mode == NumericMode::exact);
}
