#pragma once

#include <cstdint>
#include <vector>

#include "pooldesign/core.hpp"

namespace pooldesign {

/// Row pools first (floor(s/B) = a), then column pools (s mod B = b).
PoolingDesign build_matrix(std::size_t samples, int differentiate = 1);

/// Side lengths L or L-1 with the fewest long sides keeping the product >= S.
MultidimParams multidim_sides(std::size_t samples, int dims);
PoolingDesign build_multidim(std::size_t samples, int dims, int differentiate = 1);

/// Samples carry codes 1..S; pool w holds the codes with bit w set.
PoolingDesign build_binary(std::size_t samples, int differentiate = 1);

PoolingDesign build_hierarchical(std::size_t samples, int differentiate);

struct RandomSearchOptions {
  int trials = 5;
  /// Fitness is exhaustive when the number of positive sets with |P| <= D is
  /// at most this, else Monte Carlo.
  std::uint64_t exhaustive_limit = 2'000'000;
  std::size_t monte_carlo_draws = 10'000;
};

PoolingDesign build_random(std::size_t samples, int differentiate, std::uint64_t seed,
                           const RandomSearchOptions& options = {});

/// Feasible prime minimizing q * (D * gamma + 1); ties go to the larger q.
StdParams choose_std_params(std::size_t samples, int differentiate);
/// Pool index of `sample` in STD layer `layer` (layer == q is the degenerate layer).
std::uint64_t std_pool(std::uint64_t sample, std::uint64_t layer, const StdParams& params);
PoolingDesign build_std(std::size_t samples, int differentiate);

/// Shortest prefix 2, 3, 5, ... whose product reaches S^D, all exponents 1.
CrParams cr_prefix(std::size_t samples, int differentiate);
/// Minimum-sum prime powers within the prefix, each power capped by the largest prefix prime.
CrParams cr_backtrack_search(std::size_t samples, int differentiate);
PoolingDesign build_cr(std::size_t samples, int differentiate);
PoolingDesign build_cr_backtrack(std::size_t samples, int differentiate);

/// Codes assigned to samples by the special-case designs: 0..S-1, except
/// that the all-equal digit strings are swapped in so no pool is empty.
std::vector<std::uint64_t> special_codes(std::size_t samples, int base, int digits);
PoolingDesign build_cr_special2(std::size_t samples);
PoolingDesign build_cr_special3(std::size_t samples);

struct BuildOptions {
  std::uint64_t seed = 0;
  RandomSearchOptions random;
};

/// Dispatches on the method. Throws InputError for bad arguments and
/// InfeasibleError when the method has no design for (S, D).
PoolingDesign build(const MethodSpec& spec, std::size_t samples, int differentiate,
                    const BuildOptions& options = {});

}  // namespace pooldesign
