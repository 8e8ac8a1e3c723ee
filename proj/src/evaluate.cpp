#include "pooldesign/evaluate.hpp"

#include <algorithm>
#include <charconv>
#include <map>

#include "pooldesign/detail/subsets.hpp"
#include "pooldesign/hierarchical.hpp"

namespace pooldesign {
namespace {

detail::PositiveSetPlan plan_for(const PoolingDesign& design, const EvaluateOptions& options) {
  return detail::plan_positive_sets(design.samples, design.differentiate, options.enumeration_budget);
}

std::string describe(const SessionState& s) {
  if (s.status == SessionStatus::failed) return "session failed: " + std::string(to_string(s.reason));
  std::string out = "resolved {";
  for (std::size_t i = 0; i < s.resolved_positives.size(); ++i) {
    out += (i ? "," : "") + std::to_string(s.resolved_positives[i]);
  }
  return out + "} in " + std::to_string(s.rounds_used()) + " rounds";
}

struct Cost {
  std::size_t tests = 0;
  std::size_t steps = 0;
  std::size_t group = 0;
};

// The hierarchical session replayed on plain sample lists.
Cost hierarchical_cost(const PoolingDesign& design, const std::vector<std::size_t>& positives) {
  const auto& policy = std::get<HierarchicalParams>(design.params);
  struct Pool {
    SampleSet members;
    int parent;
    int budget;
  };
  auto hits = [&](const SampleSet& members) {
    std::size_t n = 0;
    for (std::size_t p : positives) n += std::binary_search(members.begin(), members.end(), p) ? 1 : 0;
    return n;
  };
  std::vector<Pool> pending;
  const int top = std::min<int>(design.differentiate, static_cast<int>(design.samples));
  for (std::size_t w = 0; w < design.round0.pools(); ++w) pending.push_back({design.round0.samples_of_pool(w), -1, top});
  Cost c;
  std::size_t confirmed = 0;
  while (!pending.empty()) {
    c.tests += pending.size();
    ++c.steps;
    std::map<int, int> positive_children;
    std::size_t positive_total = 0;
    std::vector<char> positive(pending.size());
    for (std::size_t i = 0; i < pending.size(); ++i) {
      c.group = std::max(c.group, pending[i].members.size());
      positive[i] = hits(pending[i].members) > 0;
      positive_children[pending[i].parent] += positive[i];
      positive_total += static_cast<std::size_t>(positive[i]);
    }
    for (const auto& pool : pending) {
      if (positive_children[pool.parent] > pool.budget) return c;
    }
    if (confirmed + positive_total > static_cast<std::size_t>(design.differentiate)) return c;
    std::vector<Pool> next;
    int group_id = 0;
    for (std::size_t i = 0; i < pending.size(); ++i) {
      if (!positive[i]) continue;
      auto& pool = pending[i];
      if (pool.members.size() == 1) {
        ++confirmed;
        continue;
      }
      const int budget = std::min<int>(pool.budget - positive_children[pool.parent] + 1,
                                       static_cast<int>(pool.members.size()));
      for (auto& part : balanced_partition(pool.members, policy.arity(pool.members.size(), budget))) {
        next.push_back({std::move(part), group_id, budget});
      }
      ++group_id;
    }
    pending = std::move(next);
  }
  return c;
}

}  // namespace

DesignMetrics metrics(const PoolingDesign& design, const EvaluateOptions& options) {
  const auto plan = plan_for(design, options);
  DesignMetrics m;
  m.exact = plan.exact();
  m.max_group_size = design.round0.max_pool_size();
  auto record = [&](std::size_t tests, std::size_t steps, std::size_t group) {
    m.tests_worst = std::max(m.tests_worst, tests);
    m.steps_worst = std::max(m.steps_worst, steps);
    m.max_group_size = std::max(m.max_group_size, group);
    ++m.sets_checked;
    return true;
  };
  if (design.adaptivity == Adaptivity::strictly_adaptive) {
    detail::visit_positive_sets(design.samples, plan, options.monte_carlo_draws, options.seed,
                                [&](const std::vector<std::size_t>& p) {
                                  const auto c = hierarchical_cost(design, p);
                                  return record(c.tests, c.steps, c.group);
                                });
  } else {
    // Same accounting as a session: one round, plus singleton retests of the
    // candidates when a semi-adaptive round is ambiguous.
    const RoundPlan round{0, design.round0};
    const std::size_t w = design.round0.pools();
    const bool retest = design.adaptivity == Adaptivity::semi_adaptive;
    detail::visit_positive_sets(design.samples, plan, options.monte_carlo_draws, options.seed,
                                [&](const std::vector<std::size_t>& p) {
                                  const auto out = decode_round(design, round, simulate(round, p), options.decode);
                                  if (retest && out.kind == OutcomeKind::next_round) {
                                    return record(w + out.candidates.size(), 2, 1);
                                  }
                                  return record(w, 1, 0);
                                });
  }
  m.tests_per_sample = static_cast<double>(m.tests_worst) / static_cast<double>(design.samples);
  return m;
}

VerificationReport verify_separable(const PoolingDesign& design, const EvaluateOptions& options) {
  const auto plan = plan_for(design, options);
  VerificationReport r;
  r.exact = plan.exact();
  const RoundPlan round{0, design.round0};
  detail::visit_positive_sets(design.samples, plan, options.monte_carlo_draws, options.seed,
                              [&](const std::vector<std::size_t>& p) {
                                ++r.checked;
                                const auto out = decode_round(design, round, simulate(round, p), options.decode);
                                if (out.kind == OutcomeKind::resolved && out.positives == p) return true;
                                r.ok = false;
                                r.counterexample = p;
                                r.detail = out.kind == OutcomeKind::inconclusive
                                               ? "inconclusive: " + std::string(to_string(out.reason))
                                               : std::string(to_string(out.kind));
                                return false;
                              });
  return r;
}

VerificationReport verify_sessions(const PoolingDesign& design, const EvaluateOptions& options) {
  const auto plan = plan_for(design, options);
  VerificationReport r;
  r.exact = plan.exact();
  const bool one_step = design.adaptivity == Adaptivity::non_adaptive;
  detail::visit_positive_sets(design.samples, plan, options.monte_carlo_draws, options.seed,
                              [&](const std::vector<std::size_t>& p) {
                                ++r.checked;
                                const auto s = run_session(design, p, options.decode);
                                if (s.status == SessionStatus::finished && s.resolved_positives == p &&
                                    (!one_step || s.rounds_used() == 1)) {
                                  return true;
                                }
                                r.ok = false;
                                r.counterexample = p;
                                r.detail = describe(s);
                                return false;
                              });
  return r;
}

std::string_view to_string(RankMetric m) {
  switch (m) {
    case RankMetric::tests: return "tests";
    case RankMetric::group_size: return "group_size";
    case RankMetric::steps: return "steps";
    case RankMetric::high_prevalence_scaling: return "high_prevalence_scaling";
  }
  return "unknown";
}

RankMetric parse_rank_metric(std::string_view text) {
  for (auto m : {RankMetric::tests, RankMetric::group_size, RankMetric::steps,
                 RankMetric::high_prevalence_scaling}) {
    if (text == to_string(m)) return m;
  }
  throw InputError("unknown metric '" + std::string(text) + "'");
}

std::vector<MethodSpec> comparison_methods() {
  return {{Method::hierarchical, 0}, {Method::matrix, 0},       {Method::multidim, 3},
          {Method::multidim, 4},     {Method::binary, 0},       {Method::random, 0},
          {Method::shifted_transversal, 0}, {Method::cr, 0},    {Method::cr_backtrack, 0},
          {Method::cr_special2, 0},  {Method::cr_special3, 0}};
}

std::string quintile_label(std::size_t rank, std::size_t count) {
  static const char* const kLabels[] = {"very good", "good", "average", "poor", "very poor"};
  if (count == 0) return kLabels[0];
  return kLabels[std::min<std::size_t>(rank * 5 / count, 4)];
}

RankResult rank_methods(RankMetric metric, int differentiate, const RankOptions& options) {
  if (options.s_min < 2 || options.s_max < options.s_min) throw InputError("bad sample range");
  RankResult result;
  result.metric = metric;
  result.differentiate = differentiate;
  const auto methods = options.methods.empty() ? comparison_methods() : options.methods;
  const bool per_d = metric == RankMetric::steps || metric == RankMetric::high_prevalence_scaling;
  std::vector<std::pair<std::string, double>> averages;

  for (const auto& spec : methods) {
    std::vector<int> ds;
    if (per_d) {
      for (int d = 1; d <= 4; ++d) {
        if (supports_differentiate(spec.method, d)) ds.push_back(d);
      }
    } else if (supports_differentiate(spec.method, differentiate)) {
      ds.push_back(differentiate);
    }
    if (ds.empty()) {
      result.excluded.push_back({spec.label(), "differentiate not supported"});
      continue;
    }
    double sum = 0.0;
    std::size_t n = 0;
    std::string note;
    for (std::size_t s = options.s_min; s <= options.s_max && note.empty(); ++s) {
      for (int d : ds) {
        try {
          const auto design = build(spec, s, d, options.build);
          const auto m = metrics(design, options.evaluate);
          switch (metric) {
            case RankMetric::tests: sum += static_cast<double>(m.tests_worst); break;
            case RankMetric::group_size: sum += static_cast<double>(m.max_group_size); break;
            case RankMetric::steps: sum += static_cast<double>(m.steps_worst); break;
            case RankMetric::high_prevalence_scaling: sum += m.tests_per_sample; break;
          }
          ++n;
        } catch (const Error& e) {
          note = "S=" + std::to_string(s) + " D=" + std::to_string(d) + ": " + e.what();
          break;
        }
      }
    }
    if (!note.empty()) {
      result.excluded.push_back({spec.label(), note});
      continue;
    }
    averages.emplace_back(spec.label(), sum / static_cast<double>(n));
  }
  result.entries = rank_averages(std::move(averages));
  return result;
}

std::vector<RankEntry> rank_averages(std::vector<std::pair<std::string, double>> averages) {
  std::stable_sort(averages.begin(), averages.end(), [](const auto& a, const auto& b) { return a.second < b.second; });
  std::vector<RankEntry> out;
  for (std::size_t i = 0; i < averages.size(); ++i) {
    out.push_back({averages[i].first, averages[i].second, i, quintile_label(i, averages.size())});
  }
  return out;
}

std::string format_ratio(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return ec == std::errc{} ? std::string(buf, end) : std::string("nan");
}

Json to_json(const DesignMetrics& m) {
  Json j;
  j["tests_worst"] = m.tests_worst;
  j["tests_per_sample"] = m.tests_per_sample;
  j["steps_worst"] = m.steps_worst;
  j["max_group_size"] = m.max_group_size;
  j["exact"] = m.exact;
  j["sets_checked"] = m.sets_checked;
  return j;
}

Json to_json(const VerificationReport& r) {
  Json j;
  j["ok"] = r.ok;
  j["exact"] = r.exact;
  j["checked"] = r.checked;
  j["counterexample"] = r.counterexample ? sample_set_json(*r.counterexample) : Json(nullptr);
  j["detail"] = r.detail;
  return j;
}

Json to_json(const RankResult& r) {
  Json j;
  j["metric"] = to_string(r.metric);
  j["differentiate"] = r.differentiate;
  j["entries"] = Json::array();
  for (const auto& e : r.entries) {
    j["entries"].push_back({{"method", e.label}, {"average", e.average}, {"rank", e.rank}, {"quintile", e.quintile}});
  }
  j["excluded"] = Json::array();
  for (const auto& e : r.excluded) j["excluded"].push_back({{"method", e.label}, {"note", e.note}});
  return j;
}

std::string metrics_csv_row(const std::string& label, std::size_t samples, int differentiate,
                            const std::optional<DesignMetrics>& m, const std::string& infeasible_reason) {
  std::string row = label + "," + std::to_string(samples) + "," + std::to_string(differentiate) + ",";
  if (m) {
    row += std::to_string(m->tests_worst) + "," + format_ratio(m->tests_per_sample) + "," +
           std::to_string(m->steps_worst) + "," + std::to_string(m->max_group_size) + "," +
           (m->exact ? "true" : "false") + ",";
  } else {
    row += ",,,,,";
  }
  // Reasons are free text; keep the row parseable.
  std::string reason = infeasible_reason;
  std::replace(reason.begin(), reason.end(), ',', ';');
  std::replace(reason.begin(), reason.end(), '\n', ' ');
  return row + reason;
}

}  // namespace pooldesign
