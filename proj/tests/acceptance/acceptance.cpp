// Acceptance suite: one PASS/FAIL line per headline criterion. Exits non-zero
// when any criterion fails.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "pooldesign/constructors.hpp"
#include "pooldesign/decode.hpp"
#include "pooldesign/evaluate.hpp"
#include "pooldesign/prevalence.hpp"
#include "pooldesign/sweep.hpp"

using namespace pooldesign;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(const std::string& name, bool ok, const std::string& detail) {
  std::cout << (ok ? "PASS " : "FAIL ") << name << ": " << detail << std::endl;
  if (!ok) ++failures;
}

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

std::string fmt(double v) {
  std::ostringstream ss;
  ss << v;
  return ss.str();
}

void for_each_set(std::size_t n, std::size_t d, const std::function<void(const SampleSet&)>& f) {
  SampleSet cur;
  std::function<void(std::size_t)> rec = [&](std::size_t start) {
    f(cur);
    if (cur.size() == d) return;
    for (std::size_t s = start; s < n; ++s) {
      cur.push_back(s);
      rec(s + 1);
      cur.pop_back();
    }
  };
  rec(0);
}

struct SessionSummary {
  std::size_t cases = 0;
  std::size_t wrong = 0;
  std::size_t inconclusive = 0;
  std::size_t max_tests = 0;
  std::size_t max_rounds = 0;
  std::size_t multi_round = 0;
};

SessionSummary exhaustive_sessions(const PoolingDesign& d) {
  SessionSummary out;
  for_each_set(d.samples, static_cast<std::size_t>(d.differentiate), [&](const SampleSet& p) {
    const auto st = run_session(d, p);
    ++out.cases;
    if (st.status == SessionStatus::finished) {
      if (st.resolved_positives != p) ++out.wrong;
    } else {
      ++out.inconclusive;
    }
    out.max_tests = std::max(out.max_tests, st.tests_used());
    out.max_rounds = std::max(out.max_rounds, st.rounds_used());
    if (st.rounds_used() != 1) ++out.multi_round;
  });
  return out;
}

void binary_headline() {
  const auto t0 = Clock::now();
  const auto d = build_binary(500);
  const auto m = metrics(d);
  const double secs = seconds_since(t0);
  const bool ok = d.round0.pools() == 9 && m.tests_worst == 9 && m.max_group_size == 250 && m.exact && secs < 1.0;
  report("binary-headline", ok,
         "W=" + std::to_string(d.round0.pools()) + " tests_worst=" + std::to_string(m.tests_worst) +
             " max_group=" + std::to_string(m.max_group_size) + " time=" + fmt(secs) + "s");
}

void binary_fifteen() {
  const auto d = build_binary(15);
  bool ok = d.round0.pools() == 4;
  for (std::size_t w = 0; w < d.round0.pools(); ++w) ok = ok && d.round0.pool_size(w) == 8;
  report("binary-15", ok, "W=" + std::to_string(d.round0.pools()) + " pool sizes all 8: " + (ok ? "yes" : "no"));
}

void worked_36() {
  const auto m = build_matrix(36);
  bool pools_ok = m.round0.pools() == 12;
  for (std::size_t w = 0; w < m.round0.pools(); ++w) pools_ok = pools_ok && m.round0.pool_size(w) == 6;
  const auto ms = exhaustive_sessions(m);
  const auto h = build_hierarchical(36, 1);
  const auto hs = exhaustive_sessions(h);
  const bool ok = pools_ok && ms.wrong == 0 && ms.inconclusive == 0 && ms.max_rounds == 1 && ms.cases == 37 &&
                  hs.wrong == 0 && hs.inconclusive == 0 && hs.max_tests == 10 && hs.max_rounds == 4;
  report("worked-36", ok,
         "matrix W=" + std::to_string(m.round0.pools()) + " steps=" + std::to_string(ms.max_rounds) + " over " +
             std::to_string(ms.cases) + " sets; hierarchical tests=" + std::to_string(hs.max_tests) +
             " steps=" + std::to_string(hs.max_rounds));
}

void formula_identities() {
  std::size_t bad = 0, checked = 0;
  for (std::size_t S = 9; S <= 200; ++S) {
    const auto q2 = static_cast<std::size_t>(std::ceil(std::log(static_cast<double>(S)) / std::log(3.0) - 1e-12));
    const auto q3 = static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(S)) - 1e-12));
    bad += build_cr_special2(S).round0.pools() != (q2 * q2 + 5 * q2) / 2;
    bad += build_cr_special3(S).round0.pools() != 2 * q3 * q3 - 2 * q3;
    checked += 2;
  }
  std::size_t std_designs = 0;
  for (int D = 1; D <= 4; ++D) {
    for (std::size_t S = 2; S <= 200; ++S) {
      PoolingDesign d;
      try {
        d = build_std(S, D);
      } catch (const InfeasibleError&) {
        continue;
      }
      const auto p = std::get<StdParams>(d.params);
      ++std_designs;
      bad += d.round0.pools() != p.q * static_cast<std::uint64_t>(D * p.gamma + 1);
      bad += static_cast<std::uint64_t>(D * p.gamma) > p.q;
    }
  }
  report("formula-identities", bad == 0,
         std::to_string(checked) + " special designs and " + std::to_string(std_designs) + " std designs, " +
             std::to_string(bad) + " mismatches");
}

void separability_suite() {
  const auto t0 = Clock::now();
  std::size_t cases = 0, wrong = 0, inconclusive = 0, designs = 0;
  std::size_t nonadaptive_cases = 0, nonadaptive_multi = 0;
  std::string first_problem;
  for (const auto& spec : comparison_methods()) {
    for (int D = 1; D <= 4; ++D) {
      if (!supports_differentiate(spec.method, D)) continue;
      for (std::size_t S = 2; S <= 25; ++S) {
        PoolingDesign d;
        try {
          d = build(spec, S, D);
        } catch (const Error&) {
          continue;  // no design at this (S, D)
        }
        ++designs;
        const auto r = exhaustive_sessions(d);
        cases += r.cases;
        wrong += r.wrong;
        inconclusive += r.inconclusive;
        if ((r.wrong || r.inconclusive) && first_problem.empty()) {
          first_problem = " first problem " + spec.label() + " S=" + std::to_string(S) + " D=" + std::to_string(D);
        }
        if (d.adaptivity == Adaptivity::non_adaptive) {
          nonadaptive_cases += r.cases;
          nonadaptive_multi += r.multi_round;
        }
      }
    }
  }
  const double secs = seconds_since(t0);
  report("oracle-separability", wrong == 0 && inconclusive == 0 && secs < 600,
         std::to_string(designs) + " designs, " + std::to_string(cases) + " positive sets, wrong=" +
             std::to_string(wrong) + " inconclusive=" + std::to_string(inconclusive) + " time=" + fmt(secs) + "s" +
             first_problem);
  report("non-adaptive-one-step", nonadaptive_multi == 0 && nonadaptive_cases > 0,
         std::to_string(nonadaptive_cases) + " sessions of std/cr/cr_backtrack/cr_special2/cr_special3, " +
             std::to_string(nonadaptive_multi) + " needed more than one step");
}

void std_high_prevalence() {
  const std::size_t S = 100;
  const int D = 4;
  const auto s = metrics(build_std(S, D));
  bool ok = s.tests_worst == 55 && std::abs(s.tests_per_sample - 0.55) < 1e-12;
  std::string detail = "std tests/sample=" + fmt(s.tests_per_sample);
  for (const char* label : {"cr", "cr_backtrack", "binary", "matrix", "multidim3", "multidim4", "random"}) {
    const auto m = metrics(build(parse_method_spec(label), S, D));
    detail += std::string(" ") + label + "=" + fmt(m.tests_per_sample);
    if (!(s.tests_per_sample < m.tests_per_sample)) {
      ok = false;
      detail += "(not beaten)";
    }
  }
  report("std-high-prevalence", ok, detail);
}

void backtrack_dominance() {
  std::size_t bad = 0, checked = 0;
  for (int D = 1; D <= 3; ++D) {
    for (std::size_t S = 10; S <= 200; ++S) {
      ++checked;
      bad += build_cr_backtrack(S, D).round0.pools() > build_cr(S, D).round0.pools();
    }
  }
  report("backtrack-dominance", bad == 0, std::to_string(checked) + " (S, D) pairs, " + std::to_string(bad) + " violations");
}

void prevalence_math() {
  const double p = error_prob_exact(20, 0.02, 4);
  bool ok = p < 1e-3;
  std::string detail = "P(S=20,rho=0.02,D=4)=" + fmt(p);

  std::size_t violations = 0;
  const double rhos[] = {0, .005, .01, .02, .05, .1};
  const std::size_t sizes[] = {20, 50, 100};
  for (std::size_t si = 0; si < 3; ++si) {
    for (std::size_t ri = 0; ri < 6; ++ri) {
      for (int D = 0; D <= 4; ++D) {
        const double v = error_prob_exact(sizes[si], rhos[ri], D);
        if (ri + 1 < 6 && error_prob_exact(sizes[si], rhos[ri + 1], D) < v) ++violations;
        if (si + 1 < 3 && error_prob_exact(sizes[si + 1], rhos[ri], D) < v) ++violations;
        if (D < 4 && error_prob_exact(sizes[si], rhos[ri], D + 1) > v) ++violations;
      }
    }
  }
  ok = ok && violations == 0;
  detail += " monotonicity violations=" + std::to_string(violations);

  double split_gap = 0;
  for (double rho : {0.0, 0.005, 0.01, 0.02, 0.05, 0.1}) {
    for (int D = 0; D <= 4; ++D) {
      split_gap = std::max(split_gap, std::abs(error_prob_split({100, rho, D, 1}).probability -
                                               error_prob_exact(100, rho, D)));
    }
  }
  ok = ok && split_gap <= 1e-12;
  detail += " split gap=" + fmt(split_gap);

  double worst_ratio = 1;
  for (int D = 1; D <= 4; ++D) {
    const double e = error_prob_exact(100, 0.02, D);
    const double n = error_prob_normal(100, 0.02, D);
    worst_ratio = std::max(worst_ratio, std::max(e / n, n / e));
  }
  ok = ok && worst_ratio < 3;
  detail += " normal/exact worst ratio=" + fmt(worst_ratio);
  report("prevalence-math", ok, detail);
}

void method_ranks() {
  const auto tests = rank_methods(RankMetric::tests, 1);
  const auto group = rank_methods(RankMetric::group_size, 1);
  const bool ok = !tests.entries.empty() && tests.entries.front().label == "binary" &&
                  tests.entries.back().label == "cr" && !group.entries.empty() &&
                  group.entries.front().label == "matrix";
  std::string order;
  for (const auto& e : tests.entries) order += (order.empty() ? "" : ">") + e.label;
  report("method-ranks", ok,
         "tests order " + order + "; smallest group " + (group.entries.empty() ? "?" : group.entries.front().label));
}

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    out[fs::relative(e.path(), root).string()] = ss.str();
  }
  return out;
}

void sweep_determinism() {
  const auto t0 = Clock::now();
  const auto base = fs::temp_directory_path() / ("pooldesign_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(base);
  auto m = default_manifest();
  m.output_root = base / "a";
  const auto sa = run_sweep(m);
  m.output_root = base / "b";
  run_sweep(m);
  const auto ta = tree(base / "a");
  const bool same = ta == tree(base / "b");
  std::size_t d1_feasible = 0;
  for (const auto& r : read_metrics_csv(base / "a")) d1_feasible += r.feasible && r.differentiate == 1 && r.samples <= 500;
  fs::remove_all(base);
  report("sweep-determinism", same && d1_feasible >= 4000,
         std::to_string(sa.cells) + " cells, " + std::to_string(ta.size()) + " files, identical=" +
             (same ? "yes" : "no") + ", D=1 feasible=" + std::to_string(d1_feasible) + " time=" +
             fmt(seconds_since(t0)) + "s");
}

}  // namespace

int main() {
  const std::vector<std::function<void()>> criteria{
      binary_headline, binary_fifteen,      worked_36,         formula_identities, separability_suite,
      std_high_prevalence, backtrack_dominance, prevalence_math, method_ranks,      sweep_determinism,
  };
  for (const auto& c : criteria) {
    try {
      c();
    } catch (const std::exception& e) {
      report("criterion", false, std::string("threw: ") + e.what());
    }
  }
  std::cout << (failures ? std::to_string(failures) + " criteria failed" : std::string("all criteria passed"))
            << std::endl;
  return failures ? 1 : 0;
}
