#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "pooldesign/constructors.hpp"
#include "pooldesign/decode.hpp"
#include "pooldesign/evaluate.hpp"

using namespace pooldesign;

namespace {

RoundPlan round0(const PoolingDesign& d) { return RoundPlan{0, d.round0}; }

PoolResults observe(const PoolingDesign& d, const SampleSet& p) { return simulate(round0(d), p); }

std::vector<PoolingDesign> small_designs() {
  std::vector<PoolingDesign> out;
  for (std::size_t S : {6u, 9u, 12u, 16u}) {
    for (int D = 1; D <= 3; ++D) {
      out.push_back(build_matrix(S, D));
      out.push_back(build_binary(S, D));
      out.push_back(build_cr(S, D));
      out.push_back(build_random(S, D, 1));
      if (S >= 8) out.push_back(build_multidim(S, 3, D));
    }
  }
  return out;
}

// Elimination: no sample that sits in a negative pool may be reported or retested.
void check_elimination(const PoolAssignment& pa, const std::vector<bool>& obs, const DecodeOutcome& out) {
  auto in_negative = [&](std::size_t s) {
    for (auto w : pa.pools_of_sample(s)) {
      if (!obs[w]) return true;
    }
    return false;
  };
  for (auto s : out.positives) CHECK_FALSE(in_negative(s));
  if (out.next) {
    for (std::size_t w = 0; w < out.next->pools.pools(); ++w) {
      for (auto s : out.next->pools.samples_of_pool(w)) CHECK_FALSE(in_negative(s));
    }
  }
}

}  // namespace

TEST_CASE("simulate") {
  const auto m = build_matrix(36);
  const auto none = observe(m, {});
  CHECK(std::none_of(none.outcomes.begin(), none.outcomes.end(), [](bool b) { return b; }));
  const auto r = observe(m, {14});
  for (std::size_t w = 0; w < 12; ++w) CHECK(r.outcomes[w] == (w == 2 || w == 8));
  const auto b = build_binary(15);
  for (std::size_t s = 0; s < 15; ++s) {
    const auto o = observe(b, {s});
    for (std::size_t w = 0; w < 4; ++w) CHECK(o.outcomes[w] == static_cast<bool>(((s + 1) >> w) & 1));
  }
}

TEST_CASE("decode worked examples") {
  const auto m = build_matrix(36);
  const auto empty = decode_round(m, round0(m), observe(m, {}));
  CHECK(empty.kind == OutcomeKind::resolved);
  CHECK(empty.positives.empty());

  const auto cr = build_cr(6, 1);
  // block 2 residue 0 is pool 0; block 3 residue 1 is pool 3
  PoolResults r{0, {true, false, false, true, false}};
  const auto out = decode_round(cr, round0(cr), r);
  CHECK(out.kind == OutcomeKind::resolved);
  CHECK(out.positives == SampleSet{4});
  CHECK(observe(cr, {4}).outcomes == r.outcomes);
  CHECK(out.candidates == SampleSet{4});

  const auto s2 = build_cr_special2(27);
  const auto o2 = decode_round(s2, round0(s2), observe(s2, {0, 13}));
  CHECK(o2.kind == OutcomeKind::resolved);
  CHECK(o2.positives == SampleSet{0, 13});

  const auto s3 = build_cr_special3(16);
  const auto o3 = decode_round(s3, round0(s3), observe(s3, {1, 6, 11}));
  CHECK(o3.kind == OutcomeKind::resolved);
  CHECK(o3.positives == SampleSet{1, 6, 11});
}

TEST_CASE("binary with two positives at D=1") {
  const auto b = build_binary(15, 1);
  const auto obs = observe(b, {3, 5});
  // codes 4 and 6 OR to 6, the code of sample 5: the observation cannot be
  // told apart from a single positive
  CHECK(oracle::compatible_sets(b.round0, obs.outcomes, 1) == std::vector<SampleSet>{{5}});
  const auto out = decode_round(b, round0(b), obs);
  CHECK(out.kind == OutcomeKind::resolved);
  CHECK(out.positives == SampleSet{5});

  // codes 3 and 5 OR to 7: no single sample explains it
  const auto obs2 = observe(b, {2, 4});
  const auto out2 = decode_round(b, round0(b), obs2);
  CHECK(oracle::compatible_sets(b.round0, obs2.outcomes, 1) == std::vector<SampleSet>{{6}});
  CHECK(out2.kind == OutcomeKind::resolved);

  const auto obs3 = observe(b, {0, 1});  // codes 1, 2 -> 3
  CHECK(oracle::compatible_sets(b.round0, obs3.outcomes, 1) == std::vector<SampleSet>{{2}});
}

TEST_CASE("decode agrees with the brute-force oracle on every pattern") {
  std::mt19937_64 rng(42);
  for (const auto& d : small_designs()) {
    CAPTURE(d.label());
    CAPTURE(d.samples);
    CAPTURE(d.differentiate);
    const auto& pa = d.round0;
    std::vector<std::vector<bool>> patterns;
    oracle::subsets_up_to(d.samples, static_cast<std::size_t>(d.differentiate) + 1,
                          [&](const SampleSet& p) { patterns.push_back(oracle::outcomes(pa, p)); });
    for (int i = 0; i < 40; ++i) {
      std::vector<bool> junk(pa.pools());
      for (std::size_t w = 0; w < junk.size(); ++w) junk[w] = rng() & 1;
      patterns.push_back(junk);
    }
    for (const auto& obs : patterns) {
      const auto sets = oracle::compatible_sets(pa, obs, static_cast<std::size_t>(d.differentiate));
      const auto out = decode_round(d, round0(d), PoolResults{0, obs});
      check_elimination(pa, obs, out);
      if (sets.size() == 1) {
        CHECK(out.kind == OutcomeKind::resolved);
        CHECK(out.positives == sets.front());
      } else if (sets.size() > 1) {
        CHECK(out.kind == OutcomeKind::next_round);
        REQUIRE(out.next);
        CHECK(out.next->round_index == 1);
        for (std::size_t w = 0; w < out.next->pools.pools(); ++w) CHECK(out.next->pools.pool_size(w) == 1);
        CHECK(out.next->pools.pools() == out.candidates.size());
      } else {
        CHECK(out.kind == OutcomeKind::inconclusive);
        CHECK(out.reason != InconclusiveReason::none);
      }
    }
  }
}

TEST_CASE("inconclusive reasons") {
  const auto m = build_matrix(9, 1);
  // a positive row with every column negative
  std::vector<bool> obs(6, false);
  obs[0] = true;
  const auto c = decode_round(m, round0(m), PoolResults{0, obs});
  CHECK(c.kind == OutcomeKind::inconclusive);
  CHECK(c.reason == InconclusiveReason::contradictory_results);
  // rows 0,1 and columns 0,1 positive: needs two positives
  const auto e = decode_round(m, round0(m), observe(m, {0, 4}));
  CHECK(e.kind == OutcomeKind::inconclusive);
  CHECK(e.reason == InconclusiveReason::exceeds_differentiate);
  CHECK_THROWS_AS(decode_round(m, round0(m), PoolResults{0, {true}}), InputError);
}

TEST_CASE("node budget fallback stays sound") {
  const auto b = build_binary(60, 3);
  DecodeOptions tiny;
  tiny.node_budget = 2;
  for (const SampleSet& p : {SampleSet{7}, SampleSet{3, 40}, SampleSet{1, 2, 50}}) {
    const auto out = decode_round(b, round0(b), observe(b, p), tiny);
    CHECK(out.kind != OutcomeKind::inconclusive);
    if (out.kind == OutcomeKind::resolved) CHECK(out.positives == p);
  }
}

TEST_CASE("hierarchical session on 36 samples") {
  const auto d = build_hierarchical(36, 1);
  const auto st = run_session(d, {20});
  CHECK(st.status == SessionStatus::finished);
  CHECK(st.resolved_positives == SampleSet{20});
  CHECK(st.tests_used() == 10);
  CHECK(st.rounds_used() == 4);
  for (std::size_t i = 0; i < st.history.size(); ++i) CHECK(st.history[i].plan.round_index == static_cast<int>(i));
}

TEST_CASE("session replay is deterministic") {
  const auto d = build_hierarchical(30, 2);
  auto a = session_start(d);
  auto b = session_start(d);
  const SampleSet p{4, 17};
  while (a.status == SessionStatus::awaiting_results) {
    const auto r = simulate(*a.pending, p).outcomes;
    a = session_submit(a, r);
    b = session_submit(b, r);
    CHECK(a.history.size() == b.history.size());
    CHECK(a.pending_groups.size() == b.pending_groups.size());
  }
  CHECK(a.resolved_positives == b.resolved_positives);
  CHECK(a.resolved_positives == p);
  CHECK_THROWS_AS(session_submit(a, {true}), InputError);
}

TEST_CASE("non-adaptive sessions finish in one round") {
  const auto d = build_std(100, 4);
  std::mt19937_64 rng(9);
  for (int i = 0; i < 300; ++i) {
    SampleSet p;
    const std::size_t k = rng() % 5;
    while (p.size() < k) {
      const std::size_t s = rng() % 100;
      if (std::find(p.begin(), p.end(), s) == p.end()) p.push_back(s);
    }
    std::sort(p.begin(), p.end());
    const auto st = run_session(d, p);
    CHECK(st.status == SessionStatus::finished);
    CHECK(st.rounds_used() == 1);
    CHECK(st.resolved_positives == p);
  }
}

TEST_CASE("semi-adaptive session uses one validation round") {
  const auto m = build_matrix(36, 2);
  const auto st = run_session(m, {0, 7});
  CHECK(st.status == SessionStatus::finished);
  CHECK(st.rounds_used() == 2);
  CHECK(st.resolved_positives == SampleSet{0, 7});
  CHECK(st.tests_used() == 12 + 4);
}

TEST_CASE("sessions flag too many positives") {
  const auto h = build_hierarchical(12, 1);
  const auto st = run_session(h, {0, 11});
  CHECK(st.status == SessionStatus::failed);
  CHECK(st.reason == InconclusiveReason::exceeds_differentiate);
  const auto m = build_matrix(16, 1);
  const auto sm = run_session(m, {0, 5});
  CHECK(sm.status == SessionStatus::failed);
  const auto c = build_cr(20, 1);
  CHECK(run_session(c, {1, 2, 3}).status == SessionStatus::failed);
}

TEST_CASE("session round trip over every small positive set") {
  for (const auto& d : small_designs()) {
    CAPTURE(d.label());
    CAPTURE(d.samples);
    CAPTURE(d.differentiate);
    oracle::subsets_up_to(d.samples, static_cast<std::size_t>(d.differentiate), [&](const SampleSet& p) {
      const auto st = run_session(d, p);
      CHECK(st.status == SessionStatus::finished);
      CHECK(st.resolved_positives == p);
      CHECK(st.rounds_used() <= 2);
    });
  }
  for (std::size_t S : {5u, 10u, 17u}) {
    for (int D = 1; D <= 3; ++D) {
      const auto h = build_hierarchical(S, D);
      oracle::subsets_up_to(S, static_cast<std::size_t>(D), [&](const SampleSet& p) {
        const auto st = run_session(h, p);
        CHECK(st.status == SessionStatus::finished);
        CHECK(st.resolved_positives == p);
      });
    }
  }
}

TEST_CASE("metrics equal the worst exhaustive session") {
  std::vector<PoolingDesign> designs = small_designs();
  for (std::size_t S : {7u, 13u, 20u}) {
    for (int D = 1; D <= 3; ++D) designs.push_back(build_hierarchical(S, D));
  }
  designs.push_back(build_std(20, 2));
  designs.push_back(build_cr_special2(12));
  for (const auto& d : designs) {
    CAPTURE(d.label());
    CAPTURE(d.samples);
    CAPTURE(d.differentiate);
    std::size_t tests = 0, steps = 0, group = d.round0.max_pool_size();
    oracle::subsets_up_to(d.samples, static_cast<std::size_t>(d.differentiate), [&](const SampleSet& p) {
      const auto st = run_session(d, p);
      tests = std::max(tests, st.tests_used());
      steps = std::max(steps, st.rounds_used());
      for (const auto& rec : st.history) group = std::max(group, rec.plan.pools.max_pool_size());
    });
    const auto m = metrics(d);
    CHECK(m.exact);
    CHECK(m.tests_worst == tests);
    CHECK(m.steps_worst == steps);
    CHECK(m.max_group_size == group);
    if (d.adaptivity != Adaptivity::strictly_adaptive) CHECK(m.tests_worst >= d.round0.pools());
  }
}
