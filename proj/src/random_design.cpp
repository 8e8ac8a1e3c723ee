#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>
#include <tuple>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include "pooldesign/constructors.hpp"
#include "pooldesign/detail/cover_search.hpp"
#include "pooldesign/detail/subsets.hpp"
#include "pooldesign/number_theory.hpp"

namespace pooldesign {
namespace {

constexpr std::size_t kScreenDraws = 256;
constexpr std::size_t kNodeBudget = 1'000'000;

boost::random::mt19937_64 make_rng(std::initializer_list<std::uint64_t> parts) {
  std::vector<std::uint32_t> words;
  for (std::uint64_t p : parts) {
    words.push_back(static_cast<std::uint32_t>(p));
    words.push_back(static_cast<std::uint32_t>(p >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  return boost::random::mt19937_64(seq);
}

std::vector<SampleSet> draw_pools(std::size_t samples, std::size_t pools, std::size_t pool_size,
                                  boost::random::mt19937_64& rng) {
  std::vector<std::size_t> idx(samples);
  std::vector<SampleSet> out;
  out.reserve(pools);
  for (std::size_t w = 0; w < pools; ++w) {
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = 0; i < pool_size; ++i) {
      boost::random::uniform_int_distribution<std::size_t> pick(i, samples - 1);
      std::swap(idx[i], idx[pick(rng)]);
    }
    SampleSet pool(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(pool_size));
    std::sort(pool.begin(), pool.end());
    out.push_back(std::move(pool));
  }
  return out;
}

// Worst-case session tests of one candidate: the first round plus one
// individual test per candidate whenever the first round is ambiguous.
class Fitness {
 public:
  Fitness(std::size_t samples, const std::vector<SampleSet>& pools, int differentiate)
      : samples_(samples), words_((samples + 63) / 64), pools_(pools.size()),
        limit_(static_cast<std::size_t>(differentiate)), sample_masks_(samples, 0),
        pool_words_(pools.size() * words_, 0), neg_(words_) {
    for (std::size_t w = 0; w < pools.size(); ++w) {
      for (std::size_t s : pools[w]) {
        sample_masks_[s] |= std::uint64_t{1} << w;
        pool_words_[w * words_ + s / 64] |= std::uint64_t{1} << (s % 64);
      }
    }
  }

  bool covers_all() const {
    return std::none_of(sample_masks_.begin(), sample_masks_.end(), [](std::uint64_t m) { return m == 0; });
  }

  /// Tests needed for positive set P; returns `floor` when it cannot exceed it.
  std::size_t tests(const std::vector<std::size_t>& positives, std::size_t floor) {
    std::uint64_t pos = 0;
    for (std::size_t p : positives) pos |= sample_masks_[p];
    std::fill(neg_.begin(), neg_.end(), 0);
    for (std::size_t w = 0; w < pools_; ++w) {
      if ((pos >> w) & 1u) continue;
      const std::uint64_t* row = &pool_words_[w * words_];
      for (std::size_t i = 0; i < words_; ++i) neg_[i] |= row[i];
    }
    std::size_t excluded = 0;
    for (std::uint64_t x : neg_) excluded += static_cast<std::size_t>(std::popcount(x));
    const std::size_t count = samples_ - excluded;
    if (pools_ + count <= floor) return floor;
    cands_.clear();
    for (std::size_t i = 0; i < words_; ++i) {
      std::uint64_t free = ~neg_[i];
      if (i + 1 == words_ && samples_ % 64) free &= (std::uint64_t{1} << (samples_ % 64)) - 1;
      while (free) {
        const std::size_t s = i * 64 + static_cast<std::size_t>(std::countr_zero(free));
        cands_.push_back(sample_masks_[s]);
        free &= free - 1;
      }
    }
    const auto verdict = detail::CoverSearch<std::uint64_t>(cands_, pos, limit_, kNodeBudget).run();
    const std::size_t t = verdict.verdict == detail::CoverVerdict::unique ? pools_ : pools_ + count;
    return std::max(t, floor);
  }

 private:
  std::size_t samples_;
  std::size_t words_;
  std::size_t pools_;
  std::size_t limit_;
  std::vector<std::uint64_t> sample_masks_;
  std::vector<std::uint64_t> pool_words_;
  std::vector<std::uint64_t> neg_;
  std::vector<std::uint64_t> cands_;
};

// (fitness, pool size, pools, trial); smaller is better.
using Key = std::tuple<std::size_t, std::size_t, std::size_t, int>;

}  // namespace

PoolingDesign build_random(std::size_t samples, int differentiate, std::uint64_t seed,
                           const RandomSearchOptions& options) {
  if (samples < 4) throw InputError("random design needs at least 4 samples");
  if (differentiate < 1) throw InputError("differentiate must be at least 1");
  if (options.trials < 1) throw InputError("random design needs at least one trial");

  const std::size_t root = nt::ceil_root(samples, 2);
  const std::size_t size_hi = samples / 2;
  const std::size_t size_lo = std::min(root, size_hi);
  const std::size_t pools_lo = static_cast<std::size_t>(nt::ceil_log(samples, 2));
  const std::size_t pools_hi = std::max<std::size_t>(
      pools_lo, static_cast<std::size_t>(std::floor(2.0 * std::sqrt(static_cast<double>(samples)))));
  if (pools_hi > 64) throw InputError("random design supports at most 1024 samples");

  const auto plan = detail::plan_positive_sets(samples, differentiate, options.exhaustive_limit);
  const std::uint64_t mc_seed = make_rng({seed, samples, static_cast<std::uint64_t>(differentiate), 1})();
  std::vector<std::vector<std::size_t>> screen;
  {
    auto rng = make_rng({seed, samples, static_cast<std::uint64_t>(differentiate), 2});
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(differentiate), samples);
    for (std::size_t i = 0; i < kScreenDraws; ++i) screen.push_back(detail::random_subset(samples, k, rng));
  }

  std::optional<Key> best;
  std::vector<SampleSet> best_pools;
  for (std::size_t pools = pools_lo; pools <= pools_hi; ++pools) {
    if (best && pools > std::get<0>(*best)) break;
    for (std::size_t size = size_lo; size <= size_hi; ++size) {
      if (pools * size < samples) continue;
      for (int trial = 0; trial < options.trials; ++trial) {
        auto rng = make_rng({seed, samples, pools, size, static_cast<std::uint64_t>(trial)});
        auto drawn = draw_pools(samples, pools, size, rng);
        Fitness fit(samples, drawn, differentiate);
        if (!fit.covers_all()) continue;
        std::size_t worst = pools;
        auto beaten = [&] { return best && Key{worst, size, pools, trial} > *best; };
        auto step = [&](const std::vector<std::size_t>& p) {
          worst = fit.tests(p, worst);
          return !beaten();
        };
        if (!std::all_of(screen.begin(), screen.end(), step)) continue;
        if (!detail::visit_positive_sets(samples, plan, options.monte_carlo_draws, mc_seed, step)) continue;
        best = Key{worst, size, pools, trial};
        best_pools = std::move(drawn);
      }
    }
  }
  if (!best) throw InfeasibleError("no random candidate covers all samples");

  PoolingDesign d;
  d.method = Method::random;
  d.samples = samples;
  d.differentiate = differentiate;
  d.adaptivity = adaptivity_of(Method::random);
  d.round0 = PoolAssignment(samples, std::move(best_pools));
  d.params = RandomParams{std::get<2>(*best), std::get<1>(*best), seed, std::get<3>(*best),
                          options.trials, std::get<0>(*best)};
  validate(d);
  return d;
}

}  // namespace pooldesign
