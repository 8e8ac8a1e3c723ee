#include "pooldesign/hierarchical.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <set>
#include <tuple>

#include "pooldesign/constructors.hpp"

namespace pooldesign {
namespace {

std::size_t split_rule_arity(std::size_t n) { return (n == 2 || n == 4) ? 2 : 3; }

// Worst-case cost recursion. A group of n >= 2 samples known to hold between
// one and `budget` positives is split into k parts and every part is tested;
// each positive part then becomes a group whose budget shrinks by the number
// of other positive siblings.
class SplitSolver {
 public:
  std::size_t arity(std::size_t n, int budget) {
    budget = std::min<int>(budget, static_cast<int>(n));
    if (budget <= 1) return split_rule_arity(n);
    auto key = std::pair{n, budget};
    if (auto it = arity_.find(key); it != arity_.end()) return it->second;
    std::size_t best_k = 2;
    std::size_t best_cost = std::numeric_limits<std::size_t>::max();
    for (std::size_t k = 2; k <= std::min(n, kMaxHierarchicalArity); ++k) {
      std::size_t worst = 0;
      for (int d = 1; d <= budget; ++d) worst = std::max(worst, cost_with(n, budget, d, k));
      if (worst < best_cost) {  // ties keep the smaller arity
        best_cost = worst;
        best_k = k;
      }
    }
    arity_[key] = best_k;
    return best_k;
  }

  // Worst-case tests for a group of n with policy budget `budget` holding
  // exactly d positives.
  std::size_t cost(std::size_t n, int budget, int d) {
    if (n <= 1 || d <= 0) return 0;
    budget = std::min<int>(budget, static_cast<int>(n));
    auto key = std::tuple{n, budget, d};
    if (auto it = cost_.find(key); it != cost_.end()) return it->second;
    const std::size_t v = cost_with(n, budget, d, arity(n, budget));
    cost_[key] = v;
    return v;
  }

  std::size_t cost_with(std::size_t n, int budget, int d, std::size_t k) {
    const std::size_t small = n / k;
    const std::size_t big_count = n % k;
    const std::size_t small_count = k - big_count;
    std::size_t worst = 0;
    for (int p = 1; p <= std::min<int>(d, static_cast<int>(k)); ++p) {
      const int child_budget = budget - p + 1;
      for (int pb = 0; pb <= p; ++pb) {
        const int ps = p - pb;
        if (pb > static_cast<int>(big_count) || ps > static_cast<int>(small_count)) continue;
        // Knapsack: spread d positives over pb big and ps small parts, each >= 1.
        std::vector<long long> best(d + 1, -1);
        best[0] = 0;
        auto add_part = [&](std::size_t size) {
          std::vector<long long> next(d + 1, -1);
          for (int t = 0; t <= d; ++t) {
            if (best[t] < 0) continue;
            for (int x = 1; t + x <= d && x <= static_cast<int>(size); ++x) {
              const long long v = best[t] + static_cast<long long>(cost(size, child_budget, x));
              next[t + x] = std::max(next[t + x], v);
            }
          }
          best = std::move(next);
        };
        for (int i = 0; i < pb; ++i) add_part(small + 1);
        for (int i = 0; i < ps; ++i) add_part(small);
        if (best[d] >= 0) worst = std::max(worst, static_cast<std::size_t>(best[d]));
      }
    }
    return k + worst;
  }

 private:
  std::map<std::pair<std::size_t, int>, std::size_t> arity_;
  std::map<std::tuple<std::size_t, int, int>, std::size_t> cost_;
};

}  // namespace

std::vector<SampleSet> balanced_partition(const SampleSet& group, std::size_t arity) {
  if (arity < 1 || arity > group.size()) throw InputError("invalid partition arity");
  const std::size_t small = group.size() / arity;
  const std::size_t big_count = group.size() % arity;
  std::vector<SampleSet> parts;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < arity; ++i) {
    const std::size_t len = small + (i < big_count ? 1 : 0);
    parts.emplace_back(group.begin() + static_cast<std::ptrdiff_t>(pos),
                       group.begin() + static_cast<std::ptrdiff_t>(pos + len));
    pos += len;
  }
  return parts;
}

HierarchicalParams hierarchical_policy(std::size_t samples, int differentiate) {
  SplitSolver solver;
  std::set<std::pair<std::size_t, int>> seen;
  std::vector<std::pair<std::size_t, int>> todo{
      {samples, std::min<int>(differentiate, static_cast<int>(samples))}};
  HierarchicalParams params;
  while (!todo.empty()) {
    auto [n, b] = todo.back();
    todo.pop_back();
    if (n < 2 || !seen.insert({n, b}).second) continue;
    const std::size_t k = solver.arity(n, b);
    params.policy.push_back({n, b, k});
    for (std::size_t size : {n / k, n / k + (n % k ? 1 : 0)}) {
      for (int p = 1; p <= std::min<int>(b, static_cast<int>(k)); ++p) {
        todo.push_back({size, std::min<int>(b - p + 1, static_cast<int>(size))});
      }
    }
  }
  std::sort(params.policy.begin(), params.policy.end(), [](const auto& a, const auto& b) {
    return std::pair{a.size, a.budget} < std::pair{b.size, b.budget};
  });
  return params;
}

std::size_t hierarchical_worst_tests(std::size_t samples, int differentiate) {
  SplitSolver solver;
  const int budget = std::min<int>(differentiate, static_cast<int>(samples));
  std::size_t worst = solver.arity(samples, budget);  // no positives: one round
  for (int d = 1; d <= budget; ++d) worst = std::max(worst, solver.cost(samples, budget, d));
  return worst;
}

PoolingDesign build_hierarchical(std::size_t samples, int differentiate) {
  if (samples < 2) throw InputError("hierarchical design needs at least 2 samples");
  if (differentiate < 1) throw InputError("differentiate must be at least 1");
  auto params = hierarchical_policy(samples, differentiate);
  SampleSet all(samples);
  for (std::size_t s = 0; s < samples; ++s) all[s] = s;
  const int budget = std::min<int>(differentiate, static_cast<int>(samples));
  PoolingDesign d;
  d.method = Method::hierarchical;
  d.samples = samples;
  d.differentiate = differentiate;
  d.adaptivity = Adaptivity::strictly_adaptive;
  d.round0 = PoolAssignment(samples, balanced_partition(all, params.arity(samples, budget)));
  d.params = std::move(params);
  validate(d);
  return d;
}

}  // namespace pooldesign
