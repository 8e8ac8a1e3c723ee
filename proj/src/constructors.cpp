#include "pooldesign/constructors.hpp"

#include <algorithm>
#include <functional>
#include <limits>

#include "pooldesign/number_theory.hpp"

namespace pooldesign {
namespace {

PoolingDesign make_design(Method method, std::size_t samples, int differentiate,
                          std::vector<SampleSet> pools, DesignParams params) {
  PoolingDesign d;
  d.method = method;
  d.samples = samples;
  d.differentiate = differentiate;
  d.adaptivity = adaptivity_of(method);
  d.round0 = PoolAssignment(samples, std::move(pools));
  d.params = std::move(params);
  validate(d);
  return d;
}

void require_differentiate(int differentiate) {
  if (differentiate < 1) throw InputError("differentiate must be at least 1");
}

int digit(std::uint64_t code, int position, std::uint64_t base) {
  for (int i = 0; i < position; ++i) code /= base;
  return static_cast<int>(code % base);
}

// Pool predicates of the two special-case designs, in pool order.
std::vector<std::function<bool(std::uint64_t)>> special_pools(int base, int digits) {
  std::vector<std::function<bool(std::uint64_t)>> pools;
  const auto b = static_cast<std::uint64_t>(base);
  if (base == 3) {
    for (int w = 0; w < 3 * digits; ++w) {
      pools.push_back([=](std::uint64_t c) { return digit(c, w / 3, b) == w % 3; });
    }
    for (int x = 0; x < digits; ++x) {
      for (int y = x + 1; y < digits; ++y) {
        pools.push_back([=](std::uint64_t c) { return digit(c, x, b) == digit(c, y, b); });
      }
    }
  } else {
    for (int x = 0; x < digits; ++x) {
      for (int y = x + 1; y < digits; ++y) {
        for (int vx = 0; vx < 2; ++vx) {
          for (int vy = 0; vy < 2; ++vy) {
            pools.push_back([=](std::uint64_t c) {
              return digit(c, x, b) == vx && digit(c, y, b) == vy;
            });
          }
        }
      }
    }
  }
  return pools;
}

PoolingDesign build_special(Method method, std::size_t samples, int base) {
  const int digits = nt::ceil_log(samples, static_cast<std::uint64_t>(base));
  const auto codes = special_codes(samples, base, digits);
  const auto predicates = special_pools(base, digits);
  std::vector<SampleSet> pools(predicates.size());
  for (std::size_t w = 0; w < predicates.size(); ++w) {
    for (std::size_t s = 0; s < samples; ++s) {
      if (predicates[w](codes[s])) pools[w].push_back(s);
    }
  }
  return make_design(method, samples, method == Method::cr_special2 ? 2 : 3, std::move(pools),
                     CrSpecialParams{base, digits});
}

PoolingDesign build_cr_from(Method method, std::size_t samples, int differentiate,
                            const CrParams& params) {
  std::vector<SampleSet> pools;
  for (std::uint64_t t : params.block_sizes()) {
    // Residues with no sample below S would be empty pools; they are dropped.
    const std::uint64_t used = std::min<std::uint64_t>(t, samples);
    for (std::uint64_t r = 0; r < used; ++r) {
      SampleSet pool;
      for (std::uint64_t s = r; s < samples; s += t) pool.push_back(s);
      pools.push_back(std::move(pool));
    }
  }
  return make_design(method, samples, differentiate, std::move(pools), params);
}

}  // namespace

PoolingDesign build_matrix(std::size_t samples, int differentiate) {
  if (samples < 2) throw InputError("matrix design needs at least 2 samples");
  require_differentiate(differentiate);
  const std::size_t rows = nt::ceil_root(samples, 2);
  const std::size_t cols = (samples + rows - 1) / rows;
  std::vector<SampleSet> pools(rows + cols);
  for (std::size_t s = 0; s < samples; ++s) {
    pools[s / cols].push_back(s);
    pools[rows + s % cols].push_back(s);
  }
  return make_design(Method::matrix, samples, differentiate, std::move(pools),
                     MatrixParams{rows, cols});
}

MultidimParams multidim_sides(std::size_t samples, int dims) {
  if (dims < 2) throw InputError("multidimensional design needs at least 2 dimensions");
  if (samples < nt::pow_sat(2, static_cast<unsigned>(dims))) {
    throw InputError("multidimensional design needs S >= 2^N");
  }
  const std::size_t side = nt::ceil_root(samples, static_cast<unsigned>(dims));
  for (int eta = 0; eta < dims; ++eta) {
    std::vector<std::size_t> sides(dims);
    std::uint64_t product = 1;
    for (int n = 0; n < dims; ++n) {
      sides[n] = n <= eta ? side : side - 1;
      product = nt::mul_sat(product, sides[n]);
    }
    if (product >= samples) return MultidimParams{dims, sides, eta};
  }
  throw Error(ErrorCode::internal, "no side assignment reaches S");
}

PoolingDesign build_multidim(std::size_t samples, int dims, int differentiate) {
  require_differentiate(differentiate);
  auto params = multidim_sides(samples, dims);
  std::size_t total = 0;
  for (auto l : params.side_lengths) total += l;
  std::vector<SampleSet> pools(total);
  for (std::size_t s = 0; s < samples; ++s) {
    std::size_t rest = s;
    std::size_t offset = 0;
    for (std::size_t l : params.side_lengths) {
      pools[offset + rest % l].push_back(s);
      rest /= l;
      offset += l;
    }
  }
  return make_design(Method::multidim, samples, differentiate, std::move(pools),
                     std::move(params));
}

PoolingDesign build_binary(std::size_t samples, int differentiate) {
  if (samples < 2) throw InputError("binary design needs at least 2 samples");
  require_differentiate(differentiate);
  int bits = 0;
  while ((std::uint64_t{1} << bits) <= samples) ++bits;  // ceil(log2(S + 1))
  std::vector<SampleSet> pools(bits);
  for (std::size_t s = 0; s < samples; ++s) {
    const std::uint64_t code = s + 1;
    for (int w = 0; w < bits; ++w) {
      if ((code >> w) & 1u) pools[w].push_back(s);
    }
  }
  return make_design(Method::binary, samples, differentiate, std::move(pools),
                     BinaryParams{bits});
}

StdParams choose_std_params(std::size_t samples, int differentiate) {
  if (samples < 2) throw InputError("STD needs at least 2 samples");
  require_differentiate(differentiate);
  StdParams best;
  std::uint64_t best_pools = std::numeric_limits<std::uint64_t>::max();
  for (std::uint64_t q : nt::primes_up_to(samples)) {
    const int gamma = nt::compressing_power(q, samples);
    const std::uint64_t spread = static_cast<std::uint64_t>(differentiate) * gamma;
    if (spread > q) continue;
    const auto layers = static_cast<int>(spread + 1);
    // The layer j = q groups by the top digit; every digit value must occur.
    if (spread == q && nt::mul_sat(q - 1, nt::pow_sat(q, static_cast<unsigned>(gamma))) >= samples) continue;
    const std::uint64_t pools = q * static_cast<std::uint64_t>(layers);
    if (pools <= best_pools) {
      best_pools = pools;
      best = StdParams{q, gamma, layers};
    }
  }
  if (best.q == 0) {
    throw InfeasibleError("STD infeasible for (S=" + std::to_string(samples) +
                          ", D=" + std::to_string(differentiate) + ")");
  }
  return best;
}

std::uint64_t std_pool(std::uint64_t sample, std::uint64_t layer, const StdParams& params) {
  const std::uint64_t q = params.q;
  if (layer == q) {
    // Degenerate last layer: the top base-q digit.
    return (sample / nt::pow_sat(q, static_cast<unsigned>(params.gamma))) % q;
  }
  // t = sum_c j^c * floor(s / q^c), reduced mod q term by term.
  std::uint64_t shift = 0;
  std::uint64_t jpow = 1;
  std::uint64_t qpow = 1;
  for (int c = 0; c <= params.gamma; ++c) {
    shift = (shift + (jpow * ((sample / qpow) % q)) % q) % q;
    jpow = (jpow * layer) % q;
    qpow = nt::mul_sat(qpow, q);
  }
  return shift;
}

PoolingDesign build_std(std::size_t samples, int differentiate) {
  const auto params = choose_std_params(samples, differentiate);
  std::vector<SampleSet> pools(params.q * static_cast<std::uint64_t>(params.layers));
  for (int j = 0; j < params.layers; ++j) {
    for (std::size_t s = 0; s < samples; ++s) {
      pools[j * params.q + std_pool(s, static_cast<std::uint64_t>(j), params)].push_back(s);
    }
  }
  return make_design(Method::shifted_transversal, samples, differentiate, std::move(pools),
                     params);
}

CrParams cr_prefix(std::size_t samples, int differentiate) {
  if (samples < 2) throw InputError("Chinese remainder design needs at least 2 samples");
  require_differentiate(differentiate);
  const std::uint64_t target = nt::pow_sat(samples, static_cast<unsigned>(differentiate));
  if (target == std::numeric_limits<std::uint64_t>::max()) {
    throw InfeasibleError("S^D too large for the Chinese remainder construction");
  }
  CrParams params;
  std::uint64_t product = 1;
  for (std::uint64_t p = 2; product < target; ++p) {
    if (!nt::is_prime(p)) continue;
    params.primes.push_back({p, 1});
    product = nt::mul_sat(product, p);
  }
  return params;
}

CrParams cr_backtrack_search(std::size_t samples, int differentiate) {
  const auto prefix = cr_prefix(samples, differentiate);
  const std::uint64_t target = nt::pow_sat(samples, static_cast<unsigned>(differentiate));
  const std::uint64_t cap = prefix.primes.back().prime;
  const std::size_t J = prefix.primes.size();

  // Per prime: allowed powers p^0 .. p^e_max with p^e <= cap.
  std::vector<std::vector<std::uint64_t>> powers(J);
  std::vector<std::uint64_t> best_power_product(J + 1, 1);  // suffix products of max powers
  for (std::size_t j = 0; j < J; ++j) {
    std::uint64_t v = 1;
    while (v <= cap) {
      powers[j].push_back(v);
      v = nt::mul_sat(v, prefix.primes[j].prime);
    }
  }
  for (std::size_t j = J; j-- > 0;) {
    best_power_product[j] = nt::mul_sat(best_power_product[j + 1], powers[j].back());
  }

  struct Best {
    std::uint64_t sum = std::numeric_limits<std::uint64_t>::max();
    std::size_t blocks = 0;
    std::vector<int> exps;
  } best;
  std::vector<int> exps(J, 0);

  auto better = [&](std::uint64_t sum, std::size_t blocks) {
    if (sum != best.sum) return sum < best.sum;
    if (blocks != best.blocks) return blocks < best.blocks;
    return exps < best.exps;
  };

  std::function<void(std::size_t, std::uint64_t, std::uint64_t, std::size_t)> dfs =
      [&](std::size_t j, std::uint64_t product, std::uint64_t sum, std::size_t blocks) {
        if (sum > best.sum) return;
        if (product >= target) {
          // Remaining exponents stay 0.
          for (std::size_t k = j; k < J; ++k) exps[k] = 0;
          if (better(sum, blocks)) best = {sum, blocks, exps};
          return;
        }
        if (j == J) return;
        if (nt::mul_sat(product, best_power_product[j]) < target) return;
        for (std::size_t e = 0; e < powers[j].size(); ++e) {
          exps[j] = static_cast<int>(e);
          const std::uint64_t v = powers[j][e];
          dfs(j + 1, nt::mul_sat(product, v), sum + (e ? v : 0), blocks + (e ? 1 : 0));
        }
        exps[j] = 0;
      };
  dfs(0, 1, 0, 0);

  CrParams out;
  for (std::size_t j = 0; j < J; ++j) {
    if (best.exps[j] > 0) out.primes.push_back({prefix.primes[j].prime, best.exps[j]});
  }
  return out;
}

PoolingDesign build_cr(std::size_t samples, int differentiate) {
  return build_cr_from(Method::cr, samples, differentiate, cr_prefix(samples, differentiate));
}

PoolingDesign build_cr_backtrack(std::size_t samples, int differentiate) {
  return build_cr_from(Method::cr_backtrack, samples, differentiate,
                       cr_backtrack_search(samples, differentiate));
}

std::vector<std::uint64_t> special_codes(std::size_t samples, int base, int digits) {
  const auto predicates = special_pools(base, digits);
  std::vector<std::uint64_t> codes(samples);
  for (std::size_t s = 0; s < samples; ++s) codes[s] = s;
  // Constant digit strings hit every equality pool and every digit value.
  const std::uint64_t span = nt::pow_sat(static_cast<std::uint64_t>(base), digits);
  for (int v = 1; v < base; ++v) {
    const std::uint64_t c = static_cast<std::uint64_t>(v) * (span - 1) / (base - 1);
    if (c >= samples) codes.push_back(c);
  }
  std::vector<std::size_t> hits(predicates.size(), 0);
  for (auto c : codes) {
    for (std::size_t w = 0; w < predicates.size(); ++w) hits[w] += predicates[w](c);
  }
  std::sort(codes.begin(), codes.end());
  // Drop the largest codes whose removal keeps every pool occupied.
  while (codes.size() > samples) {
    bool removed = false;
    for (std::size_t i = codes.size(); i-- > 0;) {
      bool keeps = true;
      for (std::size_t w = 0; w < predicates.size() && keeps; ++w) {
        if (predicates[w](codes[i]) && hits[w] == 1) keeps = false;
      }
      if (!keeps) continue;
      for (std::size_t w = 0; w < predicates.size(); ++w) hits[w] -= predicates[w](codes[i]);
      codes.erase(codes.begin() + static_cast<std::ptrdiff_t>(i));
      removed = true;
      break;
    }
    if (!removed) throw Error(ErrorCode::internal, "cannot assign special-design codes");
  }
  if (std::any_of(hits.begin(), hits.end(), [](auto h) { return h == 0; })) {
    throw Error(ErrorCode::internal, "special-design code assignment leaves a pool empty");
  }
  return codes;
}

PoolingDesign build_cr_special2(std::size_t samples) {
  if (samples < 3) throw InputError("special D=2 design needs at least 3 samples");
  return build_special(Method::cr_special2, samples, 3);
}

PoolingDesign build_cr_special3(std::size_t samples) {
  if (samples < 4) throw InputError("special D=3 design needs at least 4 samples");
  return build_special(Method::cr_special3, samples, 2);
}

PoolingDesign build(const MethodSpec& spec, std::size_t samples, int differentiate,
                    const BuildOptions& options) {
  switch (spec.method) {
    case Method::hierarchical: return build_hierarchical(samples, differentiate);
    case Method::matrix: return build_matrix(samples, differentiate);
    case Method::multidim: return build_multidim(samples, spec.dims, differentiate);
    case Method::binary: return build_binary(samples, differentiate);
    case Method::random:
      return build_random(samples, differentiate, options.seed, options.random);
    case Method::shifted_transversal: return build_std(samples, differentiate);
    case Method::cr: return build_cr(samples, differentiate);
    case Method::cr_backtrack: return build_cr_backtrack(samples, differentiate);
    case Method::cr_special2:
      if (differentiate != 2) throw InputError("cr_special2 requires differentiate 2");
      return build_cr_special2(samples);
    case Method::cr_special3:
      if (differentiate != 3) throw InputError("cr_special3 requires differentiate 3");
      return build_cr_special3(samples);
  }
  throw InputError("unsupported method");
}

}  // namespace pooldesign
