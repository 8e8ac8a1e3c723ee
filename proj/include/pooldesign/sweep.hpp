#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "pooldesign/evaluate.hpp"
#include "pooldesign/serialize.hpp"

namespace pooldesign {

inline constexpr std::string_view kManifestSchemaVersion = "pooldesign.sweep/1";

/// One rectangular block of the grid.
struct SweepGrid {
  std::vector<MethodSpec> methods;
  std::vector<std::size_t> s_values;
  std::vector<int> d_values;
};

struct SweepManifest {
  std::vector<SweepGrid> grids;
  std::uint64_t enumeration_budget = 10'000;
  std::size_t monte_carlo_draws = 2'000;
  std::uint64_t seed = 20240601;
  RandomSearchOptions random;
  std::filesystem::path output_root = "sweep";
  std::string created_at;  // echoed verbatim; never filled in by the tool
  std::string tool_version;
  std::string note;
  std::size_t threads = 0;  // 0 = hardware concurrency; not written to disk
};

/// Desk-scale default: D=1 for S=2..500 over the nine D=1 labels; D=2..4
/// for S=2..100 over every label that supports the D.
SweepManifest default_manifest();

Json to_json(const SweepManifest& m);
SweepManifest manifest_from_json(const Json& doc);

struct SweepCell {
  MethodSpec method;
  std::size_t samples = 0;
  int differentiate = 0;
};

/// Cells of the manifest in deterministic order (grid order, then method,
/// D, S); methods that reject a D entirely are left out.
std::vector<SweepCell> manifest_cells(const SweepManifest& m);

struct SweepSummary {
  std::size_t cells = 0;
  std::size_t feasible = 0;
  std::size_t infeasible = 0;
  std::size_t written = 0;   // design files created by this run
  std::size_t reused = 0;    // existing design files picked up again
};

Json to_json(const SweepSummary& s);

std::filesystem::path cell_path(const std::filesystem::path& root, const SweepCell& cell);

/// Writes one design per feasible cell, metrics.csv and infeasible.log.
/// Existing valid design files are reused; construction errors become
/// infeasibility records.
SweepSummary run_sweep(const SweepManifest& manifest);

struct MetricsRow {
  std::string method;
  std::size_t samples = 0;
  int differentiate = 0;
  bool feasible = false;
  DesignMetrics metrics;
  std::string infeasible_reason;
};

std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& root);

struct ExportFilter {
  std::vector<std::string> methods;  // empty = every method present
  std::size_t s_min = 0;
  std::size_t s_max = static_cast<std::size_t>(-1);
  std::vector<int> d_values;          // empty = every D present
  std::string metric = "all";         // tests | tests_per_sample | steps | max_group_size | all
};

ExportFilter parse_export_filter(std::string_view text);

struct ExportTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> missing;  // "method,S,D" requested but absent or infeasible
};

inline constexpr std::string_view kExportMetrics[] = {"tests", "tests_per_sample", "steps", "max_group_size"};

/// Long format: method,S,D,metric,value.
ExportTable export_comparison(const std::vector<MetricsRow>& rows, const ExportFilter& filter);

std::string to_csv(const ExportTable& t);
Json to_json(const ExportTable& t);

}  // namespace pooldesign
