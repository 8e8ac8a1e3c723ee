#include <doctest.h>

#include "oracles.hpp"
#include "pooldesign/constructors.hpp"
#include "pooldesign/evaluate.hpp"

using namespace pooldesign;

TEST_CASE("headline metrics") {
  const auto b = metrics(build_binary(500));
  CHECK(b.tests_worst == 9);
  CHECK(b.max_group_size == 250);
  CHECK(b.exact);

  const auto m = metrics(build_matrix(36));
  CHECK(m.tests_worst == 12);
  CHECK(m.max_group_size == 6);
  CHECK(m.steps_worst == 1);
  CHECK(m.sets_checked == 37);

  EvaluateOptions sampled;
  sampled.enumeration_budget = 10'000;
  const auto s = metrics(build_std(100, 4), sampled);
  CHECK(s.tests_worst == 55);
  CHECK(s.tests_per_sample == doctest::Approx(0.55));
  CHECK(s.steps_worst == 1);
  CHECK_FALSE(s.exact);
}

TEST_CASE("steps are one for non-adaptive designs") {
  for (auto d : {build_std(40, 2), build_cr(40, 2), build_cr_backtrack(40, 2), build_cr_special2(40),
                 build_cr_special3(20)}) {
    const auto m = metrics(d);
    CHECK(m.steps_worst == 1);
    CHECK(m.tests_worst == d.round0.pools());
    CHECK(m.max_group_size <= d.samples);
  }
}

TEST_CASE("good designs beat individual testing at one positive") {
  for (std::size_t S = 20; S <= 100; S += 10) {
    for (const auto& spec : comparison_methods()) {
      if (!supports_differentiate(spec.method, 1)) continue;
      const auto d = build(spec, S, 1);
      CAPTURE(d.label());
      CAPTURE(S);
      CHECK(metrics(d).tests_worst < S);
    }
  }
}

TEST_CASE("separability") {
  const auto r = verify_separable(build_cr_special2(27));
  CHECK(r.ok);
  CHECK(r.exact);
  CHECK(r.checked == 379);

  const auto bad = verify_separable(build_binary(15, 2));
  CHECK_FALSE(bad.ok);
  REQUIRE(bad.counterexample);
  CHECK(bad.counterexample->size() <= 2);
  // the counterexample really is ambiguous
  const auto pa = build_binary(15, 2).round0;
  CHECK(oracle::compatible_sets(pa, oracle::outcomes(pa, *bad.counterexample), 2).size() > 1);

  const auto sessions = verify_sessions(build_binary(15, 2));
  CHECK(sessions.ok);
  CHECK(verify_sessions(build_hierarchical(20, 3)).ok);
}

TEST_CASE("separability of non-adaptive designs on small sizes") {
  for (std::size_t S = 9; S <= 18; ++S) {
    for (int D = 1; D <= 3; ++D) {
      CHECK(verify_separable(build_cr(S, D)).ok);
      CHECK(verify_separable(build_cr_backtrack(S, D)).ok);
      try {
        CHECK(verify_separable(build_std(S, D)).ok);
      } catch (const InfeasibleError&) {
      }
    }
    CHECK(verify_separable(build_cr_special2(S)).ok);
    CHECK(verify_separable(build_cr_special3(S)).ok);
  }
}

TEST_CASE("rank extremes at one positive") {
  RankOptions opt;
  opt.evaluate.monte_carlo_draws = 500;
  const auto tests = rank_methods(RankMetric::tests, 1, opt);
  REQUIRE(tests.entries.size() == 9);
  CHECK(tests.entries.front().label == "binary");
  CHECK(tests.entries.front().quintile == "very good");
  CHECK(tests.entries.back().label == "cr");
  CHECK(tests.entries.back().quintile == "very poor");
  CHECK(tests.excluded.size() == 2);

  const auto group = rank_methods(RankMetric::group_size, 1, opt);
  CHECK(group.entries.front().label == "matrix");
}

TEST_CASE("rank is invariant under positive rescaling") {
  const std::vector<std::pair<std::string, double>> base{{"a", 3.0}, {"b", 1.5}, {"c", 7.25}, {"d", 1.5}, {"e", 0.1}};
  const auto ref = rank_averages(base);
  for (double k : {0.001, 2.0, 1e6}) {
    auto scaled = base;
    for (auto& [_, v] : scaled) v *= k;
    const auto got = rank_averages(scaled);
    REQUIRE(got.size() == ref.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i].label == ref[i].label);
      CHECK(got[i].quintile == ref[i].quintile);
    }
  }
  CHECK(ref.front().label == "e");
  CHECK(ref[1].label == "b");
  CHECK(ref[2].label == "d");
  const auto one = rank_averages({{"only", 4.0}});
  CHECK(one.front().rank == 0);
  CHECK(one.front().quintile == "very good");
}

TEST_CASE("quintile labels") {
  CHECK(quintile_label(0, 10) == "very good");
  CHECK(quintile_label(2, 10) == "good");
  CHECK(quintile_label(5, 10) == "average");
  CHECK(quintile_label(9, 10) == "very poor");
}

TEST_CASE("metrics csv rows") {
  DesignMetrics m;
  m.tests_worst = 7;
  m.tests_per_sample = 0.07;
  m.steps_worst = 2;
  m.max_group_size = 50;
  CHECK(metrics_csv_row("binary", 100, 1, m) == "binary,100,1,7,0.07,2,50,true,");
  CHECK(metrics_csv_row("std", 3, 4, std::nullopt, "infeasible: no prime, sorry") ==
        "std,3,4,,,,,,infeasible: no prime; sorry");
  CHECK(format_ratio(1.0 / 3.0) == "0.3333333333333333");
}

TEST_CASE("rank metric names") {
  for (auto m : {RankMetric::tests, RankMetric::group_size, RankMetric::steps, RankMetric::high_prevalence_scaling}) {
    CHECK(parse_rank_metric(to_string(m)) == m);
  }
  CHECK_THROWS_AS(parse_rank_metric("speed"), InputError);
}
