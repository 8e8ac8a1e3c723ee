#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pooldesign/constructors.hpp"
#include "pooldesign/decode.hpp"
#include "pooldesign/serialize.hpp"

namespace pooldesign {

struct DesignMetrics {
  std::size_t tests_worst = 0;
  double tests_per_sample = 0.0;
  std::size_t steps_worst = 0;
  std::size_t max_group_size = 0;
  bool exact = true;
  std::size_t sets_checked = 0;
};

struct EvaluateOptions {
  /// Positive sets enumerated exhaustively while their count stays within this.
  std::uint64_t enumeration_budget = 10'000;
  std::size_t monte_carlo_draws = 10'000;
  std::uint64_t seed = 20240601;
  DecodeOptions decode;
};

/// Worst case over full simulated sessions for every positive set |P| <= D.
DesignMetrics metrics(const PoolingDesign& design, const EvaluateOptions& options = {});

struct VerificationReport {
  bool ok = true;
  bool exact = true;
  std::size_t checked = 0;
  std::optional<SampleSet> counterexample;
  std::string detail;  // what went wrong for the counterexample
};

/// One-step check: decoding the first round alone resolves exactly P.
VerificationReport verify_separable(const PoolingDesign& design, const EvaluateOptions& options = {});

/// Full-session check: every session resolves exactly P; non-adaptive
/// designs must also finish in one round.
VerificationReport verify_sessions(const PoolingDesign& design, const EvaluateOptions& options = {});

enum class RankMetric { tests, group_size, steps, high_prevalence_scaling };
std::string_view to_string(RankMetric m);
RankMetric parse_rank_metric(std::string_view text);

struct RankEntry {
  std::string label;
  double average = 0.0;
  std::size_t rank = 0;  // 0 = best (smallest)
  std::string quintile;  // "very good" .. "very poor"
};

struct RankExclusion {
  std::string label;
  std::string note;
};

struct RankResult {
  RankMetric metric = RankMetric::tests;
  int differentiate = 1;
  std::vector<RankEntry> entries;
  std::vector<RankExclusion> excluded;
};

struct RankOptions {
  std::size_t s_min = 20;
  std::size_t s_max = 100;
  std::vector<MethodSpec> methods;  // empty = every method label
  EvaluateOptions evaluate;
  BuildOptions build;
};

/// Method labels used by comparison tables: multidim appears as multidim3
/// and multidim4.
std::vector<MethodSpec> comparison_methods();

/// Averages the metric over S in [s_min, s_max] and sorts ascending.
/// tests and group_size use `differentiate`; steps and high-prevalence
/// scaling average over every supported D in 1..4.
RankResult rank_methods(RankMetric metric, int differentiate, const RankOptions& options = {});

/// Ascending sort with rank and quintile label; ties keep input order.
std::vector<RankEntry> rank_averages(std::vector<std::pair<std::string, double>> averages);

/// "very good" for quintile 0 down to "very poor" for quintile 4.
std::string quintile_label(std::size_t rank, std::size_t count);

Json to_json(const DesignMetrics& m);
Json to_json(const VerificationReport& r);
Json to_json(const RankResult& r);

inline constexpr std::string_view kMetricsCsvHeader =
    "method,S,D,tests_worst,tests_per_sample,steps_worst,max_group_size,exact,infeasible_reason";

/// One metrics CSV row; an empty `infeasible_reason` means the cell is feasible.
std::string metrics_csv_row(const std::string& label, std::size_t samples, int differentiate,
                            const std::optional<DesignMetrics>& m, const std::string& infeasible_reason = {});

std::string format_ratio(double value);

}  // namespace pooldesign
