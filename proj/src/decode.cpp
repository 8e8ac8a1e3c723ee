#include "pooldesign/decode.hpp"

#include <algorithm>
#include <map>

#include "pooldesign/detail/cover_search.hpp"
#include "pooldesign/hierarchical.hpp"

namespace pooldesign {

std::string_view to_string(OutcomeKind k) {
  switch (k) {
    case OutcomeKind::resolved: return "resolved";
    case OutcomeKind::next_round: return "next_round";
    case OutcomeKind::inconclusive: return "inconclusive";
  }
  return "unknown";
}

std::string_view to_string(InconclusiveReason r) {
  switch (r) {
    case InconclusiveReason::none: return "";
    case InconclusiveReason::exceeds_differentiate: return "exceeds_differentiate";
    case InconclusiveReason::contradictory_results: return "contradictory_results";
  }
  return "unknown";
}

std::string_view to_string(SessionStatus s) {
  switch (s) {
    case SessionStatus::awaiting_results: return "awaiting_results";
    case SessionStatus::finished: return "finished";
    case SessionStatus::failed: return "failed";
  }
  return "unknown";
}

PoolResults simulate(const RoundPlan& round, const SampleSet& positives) {
  const Bits pos = to_bits(positives, round.pools.samples());
  PoolResults r{round.round_index, std::vector<bool>(round.pools.pools(), false)};
  for (std::size_t w = 0; w < round.pools.pools(); ++w) {
    r.outcomes[w] = round.pools.pool_bits(w).intersects(pos);
  }
  return r;
}

namespace {

template <class Mask>
detail::CoverResult search_with(const std::vector<Mask>& masks, const Mask& target,
                                std::size_t limit, std::size_t budget) {
  return detail::CoverSearch<Mask>(masks, target, limit, budget).run();
}

RoundPlan singleton_round(int index, std::size_t samples, const SampleSet& members) {
  std::vector<SampleSet> pools;
  for (std::size_t s : members) pools.push_back({s});
  return RoundPlan{index, PoolAssignment(samples, std::move(pools))};
}

}  // namespace

DecodeOutcome decode_round(int differentiate, const RoundPlan& round, const PoolResults& results,
                           const DecodeOptions& options) {
  const auto& pa = round.pools;
  if (results.outcomes.size() != pa.pools()) {
    throw InputError("expected " + std::to_string(pa.pools()) + " outcomes, got " +
                     std::to_string(results.outcomes.size()));
  }
  Bits negative(pa.samples());
  Bits covered(pa.samples());
  std::vector<std::size_t> positive_pools;
  for (std::size_t w = 0; w < pa.pools(); ++w) {
    covered |= pa.pool_bits(w);
    if (results.outcomes[w]) {
      positive_pools.push_back(w);
    } else {
      negative |= pa.pool_bits(w);
    }
  }
  DecodeOutcome out;
  const Bits cand_bits = covered - negative;
  out.candidates = to_sample_set(cand_bits);

  const std::size_t limit = static_cast<std::size_t>(std::max(differentiate, 0));
  detail::CoverResult verdict;
  if (positive_pools.size() <= 64) {
    std::vector<std::uint64_t> masks;
    masks.reserve(out.candidates.size());
    for (std::size_t s : out.candidates) {
      std::uint64_t m = 0;
      for (std::size_t i = 0; i < positive_pools.size(); ++i) {
        if (pa.pool_bits(positive_pools[i]).test(s)) m |= std::uint64_t{1} << i;
      }
      masks.push_back(m);
    }
    const std::uint64_t target =
        positive_pools.size() == 64 ? ~std::uint64_t{0}
                                    : (std::uint64_t{1} << positive_pools.size()) - 1;
    verdict = search_with(masks, target, limit, options.node_budget);
  } else {
    std::vector<Bits> masks;
    masks.reserve(out.candidates.size());
    for (std::size_t s : out.candidates) {
      Bits m(positive_pools.size());
      for (std::size_t i = 0; i < positive_pools.size(); ++i) {
        if (pa.pool_bits(positive_pools[i]).test(s)) m.set(i);
      }
      masks.push_back(std::move(m));
    }
    Bits target(positive_pools.size());
    target.set();
    verdict = search_with(masks, target, limit, options.node_budget);
  }

  switch (verdict.verdict) {
    case detail::CoverVerdict::unique:
      out.kind = OutcomeKind::resolved;
      for (std::size_t i : verdict.members) out.positives.push_back(out.candidates[i]);
      break;
    case detail::CoverVerdict::ambiguous:
    case detail::CoverVerdict::search_cutoff:
      out.kind = OutcomeKind::next_round;
      out.next = singleton_round(round.round_index + 1, pa.samples(), out.candidates);
      break;
    case detail::CoverVerdict::exceeds:
      out.kind = OutcomeKind::inconclusive;
      out.reason = InconclusiveReason::exceeds_differentiate;
      break;
    case detail::CoverVerdict::uncovered:
      out.kind = OutcomeKind::inconclusive;
      out.reason = InconclusiveReason::contradictory_results;
      break;
  }
  return out;
}

std::size_t SessionState::tests_used() const {
  std::size_t n = 0;
  for (const auto& r : history) n += r.plan.pools.pools();
  return n;
}

namespace {

SessionState finish(SessionState s, SampleSet positives) {
  s.pending.reset();
  s.pending_groups.clear();
  s.status = SessionStatus::finished;
  s.resolved_positives = std::move(positives);
  s.confirmed = s.resolved_positives;
  return s;
}

SessionState fail(SessionState s, InconclusiveReason reason) {
  s.pending.reset();
  s.pending_groups.clear();
  s.status = SessionStatus::failed;
  s.reason = reason;
  return s;
}

SessionState submit_hierarchical(SessionState s, const RoundPlan& plan,
                                 const std::vector<bool>& outcomes) {
  const auto& policy = std::get<HierarchicalParams>(s.design.params);
  const int limit = s.design.differentiate;

  // Positive pools per parent group.
  std::map<int, int> positive_children;
  std::map<int, int> budget_of;
  std::size_t positive_total = 0;
  for (std::size_t w = 0; w < outcomes.size(); ++w) {
    const auto& g = s.pending_groups[w];
    budget_of[g.parent] = g.budget;
    positive_children[g.parent] += outcomes[w] ? 1 : 0;
    positive_total += outcomes[w] ? 1 : 0;
  }
  for (const auto& [parent, count] : positive_children) {
    if (parent >= 0 && count == 0) return fail(std::move(s), InconclusiveReason::contradictory_results);
    if (count > budget_of[parent]) return fail(std::move(s), InconclusiveReason::exceeds_differentiate);
  }
  if (s.confirmed.size() + positive_total > static_cast<std::size_t>(limit)) {
    return fail(std::move(s), InconclusiveReason::exceeds_differentiate);
  }

  std::vector<SampleSet> next_pools;
  std::vector<PendingGroup> next_groups;
  int group_id = 0;
  for (std::size_t w = 0; w < outcomes.size(); ++w) {
    if (!outcomes[w]) continue;
    const auto members = plan.pools.samples_of_pool(w);
    if (members.size() == 1) {
      s.confirmed.push_back(members[0]);
      continue;
    }
    const auto& g = s.pending_groups[w];
    const int budget = std::min<int>(g.budget - positive_children[g.parent] + 1,
                                     static_cast<int>(members.size()));
    for (auto& part : balanced_partition(members, policy.arity(members.size(), budget))) {
      next_pools.push_back(std::move(part));
      next_groups.push_back({group_id, budget});
    }
    ++group_id;
  }
  std::sort(s.confirmed.begin(), s.confirmed.end());
  if (next_pools.empty()) {
    SampleSet positives = s.confirmed;
    return finish(std::move(s), std::move(positives));
  }
  s.pending = RoundPlan{plan.round_index + 1, PoolAssignment(s.design.samples, std::move(next_pools))};
  s.pending_groups = std::move(next_groups);
  return s;
}

}  // namespace

SessionState session_start(const PoolingDesign& design) {
  validate(design);
  SessionState s;
  s.design = design;
  s.pending = RoundPlan{0, design.round0};
  if (design.method == Method::hierarchical) {
    const int budget = std::min<int>(design.differentiate, static_cast<int>(design.samples));
    s.pending_groups.assign(design.round0.pools(), PendingGroup{-1, budget});
  }
  return s;
}

SessionState session_submit(const SessionState& state, const std::vector<bool>& outcomes,
                            const DecodeOptions& options) {
  if (state.status != SessionStatus::awaiting_results || !state.pending) {
    throw InputError("session is " + std::string(to_string(state.status)) +
                     " and accepts no further results");
  }
  const RoundPlan plan = *state.pending;
  if (outcomes.size() != plan.pools.pools()) {
    throw InputError("expected " + std::to_string(plan.pools.pools()) + " outcomes for round " +
                     std::to_string(plan.round_index) + ", got " +
                     std::to_string(outcomes.size()));
  }
  SessionState s = state;
  s.history.push_back({plan, PoolResults{plan.round_index, outcomes}});
  s.pending.reset();

  if (s.design.method == Method::hierarchical) return submit_hierarchical(std::move(s), plan, outcomes);

  if (plan.round_index == 0) {
    auto outcome = decode_round(s.design, plan, s.history.back().results, options);
    switch (outcome.kind) {
      case OutcomeKind::resolved: return finish(std::move(s), std::move(outcome.positives));
      case OutcomeKind::inconclusive: return fail(std::move(s), outcome.reason);
      case OutcomeKind::next_round:
        if (s.design.adaptivity == Adaptivity::non_adaptive) {
          // A separable design only turns ambiguous past its differentiate value.
          return fail(std::move(s), InconclusiveReason::exceeds_differentiate);
        }
        s.pending = std::move(outcome.next);
        return s;
    }
  }

  // Validation round: one singleton pool per candidate.
  SampleSet found;
  for (std::size_t w = 0; w < outcomes.size(); ++w) {
    if (outcomes[w]) found.push_back(plan.pools.samples_of_pool(w).front());
  }
  const auto& first = s.history.front();
  const Bits found_bits = to_bits(found, s.design.samples);
  for (std::size_t w = 0; w < first.plan.pools.pools(); ++w) {
    if (first.results.outcomes[w] && !first.plan.pools.pool_bits(w).intersects(found_bits)) {
      return fail(std::move(s), InconclusiveReason::contradictory_results);
    }
  }
  if (found.size() > static_cast<std::size_t>(s.design.differentiate)) {
    s.confirmed = found;
    return fail(std::move(s), InconclusiveReason::exceeds_differentiate);
  }
  return finish(std::move(s), std::move(found));
}

SessionState run_session(const PoolingDesign& design, const SampleSet& positives,
                         const DecodeOptions& options) {
  SessionState s = session_start(design);
  while (s.status == SessionStatus::awaiting_results) {
    s = session_submit(s, simulate(*s.pending, positives).outcomes, options);
  }
  return s;
}

}  // namespace pooldesign
