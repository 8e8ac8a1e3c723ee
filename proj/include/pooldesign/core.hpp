#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <boost/dynamic_bitset.hpp>

#include "pooldesign/error.hpp"

namespace pooldesign {

using Bits = boost::dynamic_bitset<std::uint64_t>;
using SampleSet = std::vector<std::size_t>;  // sorted ascending, unique

enum class Method {
  hierarchical,
  matrix,
  multidim,
  binary,
  random,
  shifted_transversal,
  cr,
  cr_backtrack,
  cr_special2,
  cr_special3,
};

inline constexpr Method kAllMethods[] = {
    Method::hierarchical,        Method::matrix, Method::multidim,     Method::binary,
    Method::random,              Method::shifted_transversal,          Method::cr,
    Method::cr_backtrack,        Method::cr_special2,                  Method::cr_special3,
};

enum class Adaptivity { non_adaptive, semi_adaptive, strictly_adaptive };

std::string_view to_string(Method m);
std::string_view to_string(Adaptivity a);
Method parse_method(std::string_view name);
Adaptivity parse_adaptivity(std::string_view name);

/// Adaptivity category of each method (strictly adaptive hierarchical,
/// one-step CR/STD family, everything else semi-adaptive).
Adaptivity adaptivity_of(Method m);

/// Whether a method accepts the given differentiate value.
bool supports_differentiate(Method m, int d);

/// Boolean S x W membership matrix for one round. Immutable after
/// construction; stored both pool-major and sample-major as bitsets.
class PoolAssignment {
 public:
  PoolAssignment() = default;

  /// Builds from explicit pool lists. Pools are sorted and deduplicated.
  /// Throws InputError on an empty pool or an out-of-range sample index.
  PoolAssignment(std::size_t samples, std::vector<SampleSet> pools);

  std::size_t samples() const noexcept { return samples_; }
  std::size_t pools() const noexcept { return pool_major_.size(); }

  bool contains(std::size_t sample, std::size_t pool) const;

  /// Every pool holding sample s.
  SampleSet pools_of_sample(std::size_t sample) const;
  /// Every sample in pool w.
  SampleSet samples_of_pool(std::size_t pool) const;

  const Bits& pool_bits(std::size_t pool) const { return pool_major_.at(pool); }
  const Bits& sample_bits(std::size_t sample) const { return sample_major_.at(sample); }

  std::size_t pool_size(std::size_t pool) const { return pool_major_.at(pool).count(); }
  std::size_t max_pool_size() const;

  /// Samples that appear in at least one pool.
  Bits covered() const;
  bool covers_all() const { return covered().all(); }

  friend bool operator==(const PoolAssignment& a, const PoolAssignment& b) {
    return a.samples_ == b.samples_ && a.pool_major_ == b.pool_major_;
  }

 private:
  std::size_t samples_ = 0;
  std::vector<Bits> pool_major_;
  std::vector<Bits> sample_major_;
};

struct RoundPlan {
  int round_index = 0;
  PoolAssignment pools;
};

struct PoolResults {
  int round_index = 0;
  std::vector<bool> outcomes;  // true = pool tested positive
};

// Method-specific parameter records.

struct SplitRule {
  std::size_t size = 0;
  int budget = 0;
  std::size_t arity = 0;
  friend bool operator==(const SplitRule&, const SplitRule&) = default;
};

struct HierarchicalParams {
  std::vector<SplitRule> policy;  // sorted by (size, budget)
  std::size_t arity(std::size_t size, int budget) const;
  friend bool operator==(const HierarchicalParams&, const HierarchicalParams&) = default;
};

struct MatrixParams {
  std::size_t rows = 0;
  std::size_t columns = 0;
  friend bool operator==(const MatrixParams&, const MatrixParams&) = default;
};

struct MultidimParams {
  int dims = 0;
  std::vector<std::size_t> side_lengths;
  int eta = 0;
  friend bool operator==(const MultidimParams&, const MultidimParams&) = default;
};

struct BinaryParams {
  int bits = 0;
  friend bool operator==(const BinaryParams&, const BinaryParams&) = default;
};

struct RandomParams {
  std::size_t pools = 0;
  std::size_t pool_size = 0;
  std::uint64_t seed = 0;
  int trial = 0;
  int trials = 0;
  std::size_t fitness_tests = 0;
  friend bool operator==(const RandomParams&, const RandomParams&) = default;
};

struct StdParams {
  std::uint64_t q = 0;
  int gamma = 0;
  int layers = 0;
  friend bool operator==(const StdParams&, const StdParams&) = default;
};

struct PrimePower {
  std::uint64_t prime = 0;
  int exponent = 0;
  friend bool operator==(const PrimePower&, const PrimePower&) = default;
};

struct CrParams {
  std::vector<PrimePower> primes;  // retained blocks only (exponent >= 1)
  std::vector<std::uint64_t> block_sizes() const;
  friend bool operator==(const CrParams&, const CrParams&) = default;
};

struct CrSpecialParams {
  int base = 0;
  int digits = 0;
  friend bool operator==(const CrSpecialParams&, const CrSpecialParams&) = default;
};

using DesignParams = std::variant<HierarchicalParams, MatrixParams, MultidimParams, BinaryParams,
                                  RandomParams, StdParams, CrParams, CrSpecialParams>;

struct PoolingDesign {
  Method method = Method::matrix;
  std::size_t samples = 0;
  int differentiate = 1;
  Adaptivity adaptivity = Adaptivity::semi_adaptive;
  PoolAssignment round0;
  DesignParams params;

  /// Short identifier used by sweeps and tables ("multidim3" for N=3).
  std::string label() const;

  friend bool operator==(const PoolingDesign&, const PoolingDesign&) = default;
};

/// Throws InputError when the design violates a documented invariant.
void validate(const PoolingDesign& design);

// Bitset helpers shared by the decoder and evaluator.
SampleSet to_sample_set(const Bits& bits);
Bits to_bits(const SampleSet& set, std::size_t size);

/// Method identifier plus the optional dimension used by sweeps and the CLI.
struct MethodSpec {
  Method method = Method::matrix;
  int dims = 0;  // multidim only
  std::string label() const;
  friend bool operator==(const MethodSpec&, const MethodSpec&) = default;
};

/// Accepts every method name plus "multidimN" shorthand.
MethodSpec parse_method_spec(std::string_view text);

}  // namespace pooldesign
