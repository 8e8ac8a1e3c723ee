#pragma once

// Explanation search used by elimination decoding.
//
// Candidates are described by the set of positive pools they belong to. A
// compatible explanation is a set of at most `limit` candidates whose pools
// cover every positive pool. The search branches on the lowest uncovered pool
// and visits each irredundant explanation once; every other explanation is a
// superset of one of those. It stops as soon as a second explanation shows up.

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "pooldesign/core.hpp"

namespace pooldesign::detail {

template <class Mask>
struct MaskOps;

template <>
struct MaskOps<std::uint64_t> {
  static std::uint64_t empty_like(const std::uint64_t&) { return 0; }
  static bool none(std::uint64_t m) { return m == 0; }
  static std::size_t lowest(std::uint64_t m) { return static_cast<std::size_t>(std::countr_zero(m)); }
  static bool test(std::uint64_t m, std::size_t i) { return (m >> i) & 1u; }
  static std::uint64_t minus(std::uint64_t a, std::uint64_t b) { return a & ~b; }
  static std::uint64_t join(std::uint64_t a, std::uint64_t b) { return a | b; }
  static std::uint64_t meet(std::uint64_t a, std::uint64_t b) { return a & b; }
};

template <>
struct MaskOps<Bits> {
  static Bits empty_like(const Bits& m) { return Bits(m.size()); }
  static bool none(const Bits& m) { return m.none(); }
  static std::size_t lowest(const Bits& m) { return m.find_first(); }
  static bool test(const Bits& m, std::size_t i) { return m.test(i); }
  static Bits minus(const Bits& a, const Bits& b) { return a - b; }
  static Bits join(const Bits& a, const Bits& b) { return a | b; }
  static Bits meet(const Bits& a, const Bits& b) { return a & b; }
};

enum class CoverVerdict {
  unique,        // exactly one explanation of size <= limit
  ambiguous,     // two or more explanations of size <= limit
  exceeds,       // no explanation of size <= limit
  uncovered,     // some positive pool holds no candidate at all
  search_cutoff  // node budget exhausted before a verdict; treat as ambiguous
};

struct CoverResult {
  CoverVerdict verdict = CoverVerdict::exceeds;
  std::vector<std::size_t> members;  // indices into the candidate list, when unique
};

template <class Mask>
class CoverSearch {
  using Ops = MaskOps<Mask>;

 public:
  CoverSearch(const std::vector<Mask>& candidates, const Mask& target, std::size_t limit,
              std::size_t node_budget)
      : cands_(candidates), target_(target), limit_(limit), budget_(node_budget) {}

  CoverResult run() {
    const std::size_t n = cands_.size();
    Mask any = Ops::empty_like(target_);
    Mask shared = Ops::empty_like(target_);
    for (const auto& c : cands_) {
      shared = Ops::join(shared, Ops::meet(any, c));
      any = Ops::join(any, c);
    }
    if (!Ops::none(Ops::minus(target_, any))) return {CoverVerdict::uncovered, {}};
    if (Ops::none(target_)) {
      // Empty explanation; any single extra candidate would also explain.
      if (n == 0 || limit_ == 0) return {CoverVerdict::unique, {}};
      return {CoverVerdict::ambiguous, {}};
    }

    // Candidates owning a pool no other candidate touches must be in every
    // explanation.
    std::vector<char> forced(n, 0);
    std::size_t forced_count = 0;
    Mask forced_cover = Ops::empty_like(target_);
    for (std::size_t i = 0; i < n; ++i) {
      if (!Ops::none(Ops::minus(cands_[i], shared))) {
        forced[i] = 1;
        ++forced_count;
        forced_cover = Ops::join(forced_cover, cands_[i]);
      }
    }
    if (forced_count > limit_) return {CoverVerdict::exceeds, {}};

    chosen_.clear();
    excluded_.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      if (forced[i]) chosen_.push_back(i);
    }
    found_ = 0;
    nodes_ = 0;
    cutoff_ = false;
    search(Ops::minus(target_, forced_cover), forced);
    if (found_ >= 2) return {CoverVerdict::ambiguous, {}};
    if (cutoff_) return {CoverVerdict::search_cutoff, {}};
    if (found_ == 0) return {CoverVerdict::exceeds, {}};
    // Any spare candidate added to a short explanation is a second one.
    if (first_.size() < limit_ && first_.size() < n) return {CoverVerdict::ambiguous, {}};
    std::sort(first_.begin(), first_.end());
    return {CoverVerdict::unique, first_};
  }

 private:
  void search(const Mask& uncovered, const std::vector<char>& forced) {
    if (cutoff_) return;
    if (++nodes_ > budget_) {
      cutoff_ = true;
      return;
    }
    if (Ops::none(uncovered)) {
      if (found_++ == 0) first_ = chosen_;
      return;
    }
    if (chosen_.size() >= limit_) return;
    const std::size_t bit = Ops::lowest(uncovered);
    std::vector<std::size_t> tried;
    for (std::size_t i = 0; i < cands_.size(); ++i) {
      if (forced[i] || excluded_[i] || !Ops::test(cands_[i], bit)) continue;
      chosen_.push_back(i);
      search(Ops::minus(uncovered, cands_[i]), forced);
      chosen_.pop_back();
      if (cutoff_ || found_ >= 2) break;
      excluded_[i] = 1;
      tried.push_back(i);
    }
    for (std::size_t i : tried) excluded_[i] = 0;
  }

  const std::vector<Mask>& cands_;
  Mask target_;
  std::size_t limit_;
  std::size_t budget_;
  std::vector<std::size_t> chosen_;
  std::vector<char> excluded_;
  std::vector<std::size_t> first_;
  std::size_t found_ = 0;
  std::size_t nodes_ = 0;
  bool cutoff_ = false;
};

}  // namespace pooldesign::detail
