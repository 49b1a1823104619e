// Independent reference computations used only by the tests.  Nothing here
// calls into the closed-form code paths it is used to check.

#ifndef PERSIST_TESTS_ORACLES_HPP
#define PERSIST_TESTS_ORACLES_HPP

#include <bit>
#include <cstdint>
#include <vector>

#include "persist/combinatorics.hpp"

namespace persist::oracle {

/// All subsets of {0..n-1} with exactly k members, as bitmasks (n <= 20).
inline std::vector<std::uint32_t> subsets(int n, int k) {
  std::vector<std::uint32_t> out;
  for (std::uint32_t mask = 0; mask < (1U << n); ++mask) {
    if (std::popcount(mask) == k) out.push_back(mask);
  }
  return out;
}

/// Miss probability by exhaustive enumeration: core = {0..q-1}, every
/// alpha-subset replaced, every q-subset probed, equally likely.
inline ExactRational urn_miss(int n, int q, int alpha) {
  const std::uint32_t core = q == 32 ? ~0U : (1U << q) - 1U;
  const auto replaced_sets = subsets(n, alpha);
  const auto probe_sets = subsets(n, q);
  std::int64_t misses = 0;
  for (const std::uint32_t replaced : replaced_sets) {
    const std::uint32_t surviving = core & ~replaced;
    for (const std::uint32_t probes : probe_sets) {
      if ((probes & surviving) == 0) ++misses;
    }
  }
  return ExactRational(misses, static_cast<std::int64_t>(replaced_sets.size() * probe_sets.size()));
}

/// Same experiment with probes drawn one at a time (ordered, no repeats).
inline ExactRational urn_miss_ordered(int n, int q, int alpha) {
  const std::uint32_t core = (1U << q) - 1U;
  std::int64_t misses = 0;
  std::int64_t total = 0;
  std::vector<int> draw(static_cast<std::size_t>(q));
  for (const std::uint32_t replaced : subsets(n, alpha)) {
    const std::uint32_t surviving = core & ~replaced;
    // Odometer over ordered q-tuples of distinct nodes.
    auto recurse = [&](auto&& self, int depth, std::uint32_t used) -> void {
      if (depth == q) {
        ++total;
        if ((used & surviving) == 0) ++misses;
        return;
      }
      for (int node = 0; node < n; ++node) {
        if (used & (1U << node)) continue;
        self(self, depth + 1, used | (1U << node));
      }
    };
    recurse(recurse, 0, 0U);
  }
  return ExactRational(misses, total);
}

/// Pr[|replaced & core| = k] by enumeration of the replaced set.
inline ExactRational overlap_pmf(int n, int q, int alpha, int k) {
  const std::uint32_t core = (1U << q) - 1U;
  const auto replaced_sets = subsets(n, alpha);
  std::int64_t hits = 0;
  for (const std::uint32_t replaced : replaced_sets) {
    if (std::popcount(replaced & core) == k) ++hits;
  }
  return ExactRational(hits, static_cast<std::int64_t>(replaced_sets.size()));
}

/// Product form of the conditional miss: prod_{i=1..q} (1 - (q-k)/(n-i+1)).
inline ExactRational conditional_miss_product(std::int64_t n, std::int64_t q, std::int64_t k) {
  ExactRational p = 1;
  for (std::int64_t i = 1; i <= q; ++i) p *= 1 - ExactRational(q - k, n - i + 1);
  return p;
}

inline double conditional_miss_product_float(std::int64_t n, std::int64_t q, std::int64_t k) {
  double p = 1.0;
  for (std::int64_t i = 1; i <= q; ++i) {
    p *= 1.0 - static_cast<double>(q - k) / static_cast<double>(n - i + 1);
  }
  return p;
}

/// 1 - (1 - c)^delta in exact arithmetic for rational c.
inline ExactRational churn_ratio_exact(const ExactRational& c, int delta) {
  ExactRational survive = 1;
  for (int i = 0; i < delta; ++i) survive *= 1 - c;
  return 1 - survive;
}

/// Smallest q whose exact miss probability is at most eps, by linear scan.
template <typename MissFn>
std::int64_t linear_scan_min_q(std::int64_t n, const ExactRational& eps, MissFn&& miss) {
  for (std::int64_t q = 0; q <= n; ++q) {
    if (miss(q) <= eps) return q;
  }
  return -1;
}

/// Direct exact sum of the closed form with every binomial from a Pascal
/// triangle, independent of the library's binomial routine.
class PascalTriangle {
 public:
  explicit PascalTriangle(int max_m) : rows_(static_cast<std::size_t>(max_m) + 1) {
    for (int m = 0; m <= max_m; ++m) {
      auto& row = rows_[static_cast<std::size_t>(m)];
      row.assign(static_cast<std::size_t>(m) + 1, BigInt(1));
      for (int r = 1; r < m; ++r) {
        row[static_cast<std::size_t>(r)] =
            rows_[static_cast<std::size_t>(m - 1)][static_cast<std::size_t>(r - 1)] +
            rows_[static_cast<std::size_t>(m - 1)][static_cast<std::size_t>(r)];
      }
    }
  }
  BigInt operator()(std::int64_t m, std::int64_t r) const {
    if (m < 0 || r < 0 || r > m) return BigInt(0);
    return rows_[static_cast<std::size_t>(m)][static_cast<std::size_t>(r)];
  }

 private:
  std::vector<std::vector<BigInt>> rows_;
};

}  // namespace persist::oracle

#endif  // PERSIST_TESTS_ORACLES_HPP
