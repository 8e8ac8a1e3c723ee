#include "pooldesign/core.hpp"

#include <algorithm>
#include <charconv>

namespace pooldesign {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::bad_input: return "bad_input";
    case ErrorCode::infeasible: return "infeasible";
    case ErrorCode::inconclusive: return "inconclusive";
    case ErrorCode::not_found: return "not_found";
    case ErrorCode::internal: return "internal";
  }
  return "internal";
}

std::string_view to_string(Method m) {
  switch (m) {
    case Method::hierarchical: return "hierarchical";
    case Method::matrix: return "matrix";
    case Method::multidim: return "multidim";
    case Method::binary: return "binary";
    case Method::random: return "random";
    case Method::shifted_transversal: return "std";
    case Method::cr: return "cr";
    case Method::cr_backtrack: return "cr_backtrack";
    case Method::cr_special2: return "cr_special2";
    case Method::cr_special3: return "cr_special3";
  }
  return "unknown";
}

std::string_view to_string(Adaptivity a) {
  switch (a) {
    case Adaptivity::non_adaptive: return "non_adaptive";
    case Adaptivity::semi_adaptive: return "semi_adaptive";
    case Adaptivity::strictly_adaptive: return "strictly_adaptive";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  for (Method m : kAllMethods) {
    if (to_string(m) == name) return m;
  }
  throw InputError("unknown method '" + std::string(name) + "'");
}

Adaptivity parse_adaptivity(std::string_view name) {
  for (Adaptivity a : {Adaptivity::non_adaptive, Adaptivity::semi_adaptive,
                       Adaptivity::strictly_adaptive}) {
    if (to_string(a) == name) return a;
  }
  throw InputError("unknown adaptivity '" + std::string(name) + "'");
}

Adaptivity adaptivity_of(Method m) {
  switch (m) {
    case Method::hierarchical: return Adaptivity::strictly_adaptive;
    case Method::shifted_transversal:
    case Method::cr:
    case Method::cr_backtrack:
    case Method::cr_special2:
    case Method::cr_special3: return Adaptivity::non_adaptive;
    default: return Adaptivity::semi_adaptive;
  }
}

bool supports_differentiate(Method m, int d) {
  if (m == Method::cr_special2) return d == 2;
  if (m == Method::cr_special3) return d == 3;
  return d >= 1;
}

PoolAssignment::PoolAssignment(std::size_t samples, std::vector<SampleSet> pools)
    : samples_(samples) {
  if (samples == 0) throw InputError("pool assignment needs at least one sample");
  if (pools.empty()) throw InputError("pool assignment needs at least one pool");
  pool_major_.reserve(pools.size());
  sample_major_.assign(samples, Bits(pools.size()));
  for (std::size_t w = 0; w < pools.size(); ++w) {
    if (pools[w].empty()) throw InputError("pool " + std::to_string(w) + " is empty");
    Bits bits(samples);
    for (std::size_t s : pools[w]) {
      if (s >= samples) {
        throw InputError("sample index " + std::to_string(s) + " out of range [0, " +
                         std::to_string(samples) + ")");
      }
      bits.set(s);
      sample_major_[s].set(w);
    }
    pool_major_.push_back(std::move(bits));
  }
}

bool PoolAssignment::contains(std::size_t sample, std::size_t pool) const {
  if (sample >= samples_) throw InputError("sample index out of range");
  if (pool >= pools()) throw InputError("pool index out of range");
  return pool_major_[pool].test(sample);
}

SampleSet PoolAssignment::pools_of_sample(std::size_t sample) const {
  if (sample >= samples_) {
    throw InputError("sample index " + std::to_string(sample) + " out of range");
  }
  return to_sample_set(sample_major_[sample]);
}

SampleSet PoolAssignment::samples_of_pool(std::size_t pool) const {
  if (pool >= pools()) throw InputError("pool index " + std::to_string(pool) + " out of range");
  return to_sample_set(pool_major_[pool]);
}

std::size_t PoolAssignment::max_pool_size() const {
  std::size_t best = 0;
  for (const auto& p : pool_major_) best = std::max(best, p.count());
  return best;
}

Bits PoolAssignment::covered() const {
  Bits all(samples_);
  for (const auto& p : pool_major_) all |= p;
  return all;
}

std::size_t HierarchicalParams::arity(std::size_t size, int budget) const {
  auto it = std::lower_bound(policy.begin(), policy.end(), std::pair{size, budget},
                             [](const SplitRule& r, const std::pair<std::size_t, int>& key) {
                               return std::pair{r.size, r.budget} < key;
                             });
  if (it == policy.end() || it->size != size || it->budget != budget) {
    throw InputError("split policy has no rule for group size " + std::to_string(size) +
                     " with budget " + std::to_string(budget));
  }
  return it->arity;
}

std::vector<std::uint64_t> CrParams::block_sizes() const {
  std::vector<std::uint64_t> out;
  for (const auto& pp : primes) {
    std::uint64_t t = 1;
    for (int e = 0; e < pp.exponent; ++e) t *= pp.prime;
    out.push_back(t);
  }
  return out;
}

std::string MethodSpec::label() const {
  if (method == Method::multidim) return "multidim" + std::to_string(dims);
  return std::string(to_string(method));
}

MethodSpec parse_method_spec(std::string_view text) {
  constexpr std::string_view prefix = "multidim";
  if (text.size() > prefix.size() && text.substr(0, prefix.size()) == prefix) {
    int dims = 0;
    auto tail = text.substr(prefix.size());
    auto [ptr, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), dims);
    if (ec != std::errc() || ptr != tail.data() + tail.size() || dims < 2) {
      throw InputError("bad multidim method spec '" + std::string(text) + "'");
    }
    return {Method::multidim, dims};
  }
  Method m = parse_method(text);
  return {m, m == Method::multidim ? 2 : 0};
}

std::string PoolingDesign::label() const {
  if (method == Method::multidim) {
    return MethodSpec{method, std::get<MultidimParams>(params).dims}.label();
  }
  return std::string(to_string(method));
}

void validate(const PoolingDesign& design) {
  if (design.samples == 0) throw InputError("design has no samples");
  if (design.round0.samples() != design.samples) {
    throw InputError("round 0 sample count does not match declared samples");
  }
  if (!supports_differentiate(design.method, design.differentiate)) {
    throw InputError("differentiate " + std::to_string(design.differentiate) +
                     " not supported by method " + std::string(to_string(design.method)));
  }
  if (design.adaptivity != adaptivity_of(design.method)) {
    throw InputError("adaptivity does not match method " + std::string(to_string(design.method)));
  }
  if (!design.round0.covers_all()) throw InputError("round 0 leaves samples untested");
}

SampleSet to_sample_set(const Bits& bits) {
  SampleSet out;
  out.reserve(bits.count());
  for (auto i = bits.find_first(); i != Bits::npos; i = bits.find_next(i)) out.push_back(i);
  return out;
}

Bits to_bits(const SampleSet& set, std::size_t size) {
  Bits bits(size);
  for (std::size_t s : set) {
    if (s >= size) throw InputError("sample index " + std::to_string(s) + " out of range");
    bits.set(s);
  }
  return bits;
}

}  // namespace pooldesign
