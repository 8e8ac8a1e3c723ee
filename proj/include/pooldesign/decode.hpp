#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pooldesign/core.hpp"

namespace pooldesign {

/// Ideal tests: a pool is positive iff it holds at least one positive sample.
PoolResults simulate(const RoundPlan& round, const SampleSet& positives);

enum class OutcomeKind { resolved, next_round, inconclusive };
enum class InconclusiveReason { none, exceeds_differentiate, contradictory_results };

std::string_view to_string(OutcomeKind k);
std::string_view to_string(InconclusiveReason r);

struct DecodeOutcome {
  OutcomeKind kind = OutcomeKind::resolved;
  SampleSet positives;            // resolved
  std::optional<RoundPlan> next;  // next_round: one singleton pool per candidate
  SampleSet candidates;           // in some pool, in no negative pool
  InconclusiveReason reason = InconclusiveReason::none;
};

struct DecodeOptions {
  /// Search nodes allowed when proving an explanation unique; past this the
  /// decoder falls back to a validation round.
  std::size_t node_budget = 1'000'000;
};

/// Elimination decoding of one round against the design's differentiate value.
DecodeOutcome decode_round(int differentiate, const RoundPlan& round, const PoolResults& results,
                           const DecodeOptions& options = {});

inline DecodeOutcome decode_round(const PoolingDesign& design, const RoundPlan& round,
                                  const PoolResults& results, const DecodeOptions& options = {}) {
  return decode_round(design.differentiate, round, results, options);
}

enum class SessionStatus { awaiting_results, finished, failed };
std::string_view to_string(SessionStatus s);

struct SessionRecord {
  RoundPlan plan;
  PoolResults results;
};

/// Where a pending hierarchical pool came from: the group it was split out
/// of and that group's positive budget.
struct PendingGroup {
  int parent = -1;  // -1 for the first round
  int budget = 0;
};

/// Immutable session value; session_submit returns a new state.
struct SessionState {
  PoolingDesign design;
  std::vector<SessionRecord> history;
  std::optional<RoundPlan> pending;
  std::vector<PendingGroup> pending_groups;  // hierarchical only, one per pending pool
  SampleSet confirmed;                       // positives pinned down so far
  SessionStatus status = SessionStatus::awaiting_results;
  SampleSet resolved_positives;
  InconclusiveReason reason = InconclusiveReason::none;

  std::size_t tests_used() const;
  std::size_t rounds_used() const { return history.size(); }
};

SessionState session_start(const PoolingDesign& design);
SessionState session_submit(const SessionState& state, const std::vector<bool>& outcomes,
                            const DecodeOptions& options = {});

/// Drives a full session with simulated results for a known positive set.
SessionState run_session(const PoolingDesign& design, const SampleSet& positives,
                         const DecodeOptions& options = {});

}  // namespace pooldesign
