#pragma once

// Positive-set enumeration shared by the random-design fitness and the
// evaluator: every set with |P| <= D when the count fits a budget, otherwise
// the sizes that fit are enumerated and the rest are sampled.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/uniform_int_distribution.hpp>

namespace pooldesign::detail {

inline std::uint64_t binom_sat(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    const std::uint64_t num = n - k + i;
    // r * num / i stays integral at every step.
    if (r > std::numeric_limits<std::uint64_t>::max() / num) return std::numeric_limits<std::uint64_t>::max();
    r = r * num / i;
  }
  return r;
}

/// Number of subsets of {0..n-1} with size <= d.
inline std::uint64_t count_up_to(std::uint64_t n, int d) {
  std::uint64_t total = 0;
  for (int k = 0; k <= d; ++k) {
    const std::uint64_t c = binom_sat(n, static_cast<std::uint64_t>(k));
    if (c > std::numeric_limits<std::uint64_t>::max() - total) return std::numeric_limits<std::uint64_t>::max();
    total += c;
  }
  return total;
}

/// Calls f(set) for every k-subset in lexicographic order; stops when f returns false.
template <class F>
bool for_each_subset(std::size_t n, std::size_t k, F&& f) {
  if (k > n) return true;
  std::vector<std::size_t> c(k);
  for (std::size_t i = 0; i < k; ++i) c[i] = i;
  while (true) {
    if (!f(static_cast<const std::vector<std::size_t>&>(c))) return false;
    std::size_t i = k;
    while (i > 0 && c[i - 1] == n - k + i - 1) --i;
    if (i == 0) return true;
    ++c[i - 1];
    for (std::size_t j = i; j < k; ++j) c[j] = c[j - 1] + 1;
  }
}

/// Uniform k-subset (Floyd's algorithm), sorted.
template <class Rng>
std::vector<std::size_t> random_subset(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<std::size_t> out;
  out.reserve(k);
  for (std::size_t j = n - k; j < n; ++j) {
    boost::random::uniform_int_distribution<std::size_t> pick(0, j);
    const std::size_t t = pick(rng);
    if (std::find(out.begin(), out.end(), t) == out.end()) {
      out.push_back(t);
    } else {
      out.push_back(j);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct PositiveSetPlan {
  std::vector<std::size_t> exhaustive_sizes;
  std::vector<std::size_t> sampled_sizes;
  bool exact() const { return sampled_sizes.empty(); }
};

/// Sizes 0..d in ascending order go to exhaustive enumeration while the
/// running count stays within the budget; the rest are sampled.
inline PositiveSetPlan plan_positive_sets(std::size_t n, int d, std::uint64_t budget) {
  PositiveSetPlan plan;
  std::uint64_t used = 0;
  const std::size_t top = std::min<std::size_t>(static_cast<std::size_t>(std::max(d, 0)), n);
  for (std::size_t k = 0; k <= top; ++k) {
    const std::uint64_t c = binom_sat(n, k);
    if (plan.sampled_sizes.empty() && c <= budget - std::min(used, budget)) {
      plan.exhaustive_sizes.push_back(k);
      used += c;
    } else {
      plan.sampled_sizes.push_back(k);
    }
  }
  return plan;
}

/// Visits the planned sets: exhaustive sizes largest first, then `draws`
/// samples spread evenly over the sampled sizes. Stops when f returns false.
template <class F>
bool visit_positive_sets(std::size_t n, const PositiveSetPlan& plan, std::size_t draws,
                         std::uint64_t seed, F&& f) {
  for (auto it = plan.exhaustive_sizes.rbegin(); it != plan.exhaustive_sizes.rend(); ++it) {
    if (!for_each_subset(n, *it, f)) return false;
  }
  if (plan.sampled_sizes.empty()) return true;
  boost::random::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < draws; ++i) {
    const std::size_t k = plan.sampled_sizes[i % plan.sampled_sizes.size()];
    if (!f(static_cast<const std::vector<std::size_t>&>(random_subset(n, k, rng)))) return false;
  }
  return true;
}

}  // namespace pooldesign::detail
