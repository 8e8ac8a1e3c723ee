#pragma once

#include <cstddef>
#include <vector>

#include "pooldesign/core.hpp"

namespace pooldesign {

/// Splits a sorted group into `arity` contiguous parts whose sizes differ by
/// at most one; the larger parts come first.
std::vector<SampleSet> balanced_partition(const SampleSet& group, std::size_t arity);

/// Largest arity the exhaustive split search considers.
inline constexpr std::size_t kMaxHierarchicalArity = 6;

/// Split policy for every (group size, positive budget) pair a session can
/// reach from (S, D). Budget 1 uses the split-into-three rule (two when 2 or
/// 4 samples remain); larger budgets use the worst-case-optimal arity.
HierarchicalParams hierarchical_policy(std::size_t samples, int differentiate);

/// Worst-case total tests of the policy over all positive sets with |P| <= D,
/// from the split recursion (no session simulation).
std::size_t hierarchical_worst_tests(std::size_t samples, int differentiate);

}  // namespace pooldesign
