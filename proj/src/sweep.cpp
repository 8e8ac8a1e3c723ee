#include "pooldesign/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

namespace pooldesign {
namespace fs = std::filesystem;

namespace {

std::vector<std::size_t> range(std::size_t lo, std::size_t hi) {
  std::vector<std::size_t> v;
  for (std::size_t s = lo; s <= hi; ++s) v.push_back(s);
  return v;
}

Json s_values_json(const std::vector<std::size_t>& v) {
  const bool contiguous = v.size() > 2 && std::adjacent_find(v.begin(), v.end(), [](std::size_t a, std::size_t b) {
                                            return b != a + 1;
                                          }) == v.end();
  if (contiguous) return Json{{"min", v.front()}, {"max", v.back()}};
  return Json(v);
}

std::vector<std::size_t> s_values_from_json(const Json& j) {
  if (j.is_object()) return range(j.at("min").get<std::size_t>(), j.at("max").get<std::size_t>());
  return j.get<std::vector<std::size_t>>();
}

void write_file(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::internal, "cannot write " + tmp.string());
    out << text;
    if (!out) throw Error(ErrorCode::internal, "write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CellOutcome {
  std::optional<DesignMetrics> metrics;
  std::string reason;
  bool reused = false;
  bool written = false;
};

CellOutcome run_cell(const SweepManifest& m, const SweepCell& cell) {
  CellOutcome out;
  const fs::path path = cell_path(m.output_root, cell);
  try {
    std::optional<PoolingDesign> design;
    if (fs::exists(path)) {
      try {
        auto loaded = deserialize(read_file(path));
        if (loaded.label() == cell.method.label() && loaded.samples == cell.samples &&
            loaded.differentiate == cell.differentiate) {
          design = std::move(loaded);
          out.reused = true;
        }
      } catch (const Error&) {
        // Damaged or foreign file: rebuild it.
      } catch (const std::exception&) {
      }
    }
    if (!design) {
      BuildOptions opts;
      opts.seed = m.seed;
      opts.random = m.random;
      design = build(cell.method, cell.samples, cell.differentiate, opts);
      write_file(path, serialize(*design));
      out.written = true;
    }
    EvaluateOptions eval;
    eval.enumeration_budget = m.enumeration_budget;
    eval.monte_carlo_draws = m.monte_carlo_draws;
    eval.seed = m.seed;
    out.metrics = metrics(*design, eval);
  } catch (const Error& e) {
    out.reason = std::string(to_string(e.code())) + ": " + e.what();
  } catch (const std::exception& e) {
    out.reason = std::string("internal: ") + e.what();
  }
  return out;
}

}  // namespace

SweepManifest default_manifest() {
  SweepManifest m;
  m.note = "desk-scale reconstruction of the published design grid";
  std::vector<MethodSpec> d1;
  for (const auto& spec : comparison_methods()) {
    if (supports_differentiate(spec.method, 1)) d1.push_back(spec);
  }
  m.grids.push_back({d1, range(2, 500), {1}});
  m.grids.push_back({comparison_methods(), range(2, 100), {2, 3, 4}});
  return m;
}

Json to_json(const SweepManifest& m) {
  Json j;
  j["schema_version"] = kManifestSchemaVersion;
  j["note"] = m.note;
  j["created_at"] = m.created_at;
  j["tool_version"] = m.tool_version;
  j["enumeration_budget"] = m.enumeration_budget;
  j["monte_carlo_draws"] = m.monte_carlo_draws;
  j["seed"] = m.seed;
  j["random"] = {{"trials", m.random.trials},
                 {"exhaustive_limit", m.random.exhaustive_limit},
                 {"monte_carlo_draws", m.random.monte_carlo_draws}};
  j["grids"] = Json::array();
  for (const auto& g : m.grids) {
    Json methods = Json::array();
    for (const auto& spec : g.methods) methods.push_back(spec.label());
    j["grids"].push_back({{"methods", methods}, {"s_values", s_values_json(g.s_values)}, {"d_values", g.d_values}});
  }
  return j;
}

SweepManifest manifest_from_json(const Json& doc) {
  try {
    if (doc.value("schema_version", std::string(kManifestSchemaVersion)) != kManifestSchemaVersion) {
      throw InputError("unsupported manifest schema_version");
    }
    SweepManifest m;
    m.note = doc.value("note", std::string());
    m.created_at = doc.value("created_at", std::string());
    m.tool_version = doc.value("tool_version", std::string());
    m.enumeration_budget = doc.value("enumeration_budget", m.enumeration_budget);
    m.monte_carlo_draws = doc.value("monte_carlo_draws", m.monte_carlo_draws);
    m.seed = doc.value("seed", m.seed);
    if (doc.contains("output_root")) m.output_root = doc.at("output_root").get<std::string>();
    if (doc.contains("threads")) m.threads = doc.at("threads").get<std::size_t>();
    if (doc.contains("random")) {
      const auto& r = doc.at("random");
      m.random.trials = r.value("trials", m.random.trials);
      m.random.exhaustive_limit = r.value("exhaustive_limit", m.random.exhaustive_limit);
      m.random.monte_carlo_draws = r.value("monte_carlo_draws", m.random.monte_carlo_draws);
    }
    auto grid_from = [](const Json& g) {
      SweepGrid grid;
      for (const auto& name : g.at("methods")) grid.methods.push_back(parse_method_spec(name.get<std::string>()));
      grid.s_values = s_values_from_json(g.at("s_values"));
      grid.d_values = g.at("d_values").get<std::vector<int>>();
      return grid;
    };
    if (doc.contains("grids")) {
      for (const auto& g : doc.at("grids")) m.grids.push_back(grid_from(g));
    } else {
      m.grids.push_back(grid_from(doc));
    }
    if (manifest_cells(m).empty()) throw InputError("manifest grid is empty");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed manifest: ") + e.what());
  }
}

std::vector<SweepCell> manifest_cells(const SweepManifest& m) {
  std::vector<SweepCell> cells;
  std::set<std::tuple<std::string, int, std::size_t>> seen;
  for (const auto& g : m.grids) {
    for (const auto& spec : g.methods) {
      for (int d : g.d_values) {
        if (!supports_differentiate(spec.method, d)) continue;
        for (std::size_t s : g.s_values) {
          if (seen.insert({spec.label(), d, s}).second) cells.push_back({spec, s, d});
        }
      }
    }
  }
  return cells;
}

fs::path cell_path(const fs::path& root, const SweepCell& cell) {
  return root / cell.method.label() /
         ("S" + std::to_string(cell.samples) + "_D" + std::to_string(cell.differentiate) + ".json");
}

Json to_json(const SweepSummary& s) {
  return Json{{"cells", s.cells}, {"feasible", s.feasible}, {"infeasible", s.infeasible},
              {"written", s.written}, {"reused", s.reused}};
}

SweepSummary run_sweep(const SweepManifest& manifest) {
  const auto cells = manifest_cells(manifest);
  if (cells.empty()) throw InputError("manifest grid is empty");
  fs::create_directories(manifest.output_root);

  std::vector<CellOutcome> outcomes(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) outcomes[i] = run_cell(manifest, cells[i]);
  };
  std::size_t threads = manifest.threads ? manifest.threads : std::thread::hardware_concurrency();
  threads = std::clamp<std::size_t>(threads, 1, cells.size());
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }

  std::vector<std::size_t> order(cells.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::tuple(cells[a].method.label(), cells[a].differentiate, cells[a].samples) <
           std::tuple(cells[b].method.label(), cells[b].differentiate, cells[b].samples);
  });

  SweepSummary summary;
  summary.cells = cells.size();
  std::string csv = std::string(kMetricsCsvHeader) + "\n";
  std::string log;
  for (std::size_t i : order) {
    const auto& c = cells[i];
    const auto& o = outcomes[i];
    csv += metrics_csv_row(c.method.label(), c.samples, c.differentiate, o.metrics, o.reason) + "\n";
    if (o.metrics) {
      ++summary.feasible;
    } else {
      ++summary.infeasible;
      log += c.method.label() + " S=" + std::to_string(c.samples) + " D=" + std::to_string(c.differentiate) +
             ": " + o.reason + "\n";
    }
    summary.written += o.written ? 1 : 0;
    summary.reused += o.reused ? 1 : 0;
  }
  write_file(manifest.output_root / "metrics.csv", csv);
  write_file(manifest.output_root / "infeasible.log", log);
  write_file(manifest.output_root / "manifest.json", to_json(manifest).dump(2) + "\n");
  return summary;
}

namespace {

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find(sep, start), text.size());
    out.emplace_back(text.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

template <class T>
T parse_number(std::string_view text, const char* what) {
  T v{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw InputError(std::string("bad ") + what + " '" + std::string(text) + "'");
  }
  return v;
}

}  // namespace

std::vector<MetricsRow> read_metrics_csv(const fs::path& root) {
  const fs::path path = root / "metrics.csv";
  if (!fs::exists(path)) throw NotFoundError("no metrics.csv under " + root.string());
  std::istringstream in(read_file(path));
  std::string line;
  std::getline(in, line);
  if (line != kMetricsCsvHeader) throw InputError("unexpected metrics.csv header");
  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 9) throw InputError("malformed metrics.csv row: " + line);
    MetricsRow r;
    r.method = f[0];
    r.samples = parse_number<std::size_t>(f[1], "S");
    r.differentiate = parse_number<int>(f[2], "D");
    r.feasible = !f[3].empty();
    if (r.feasible) {
      r.metrics.tests_worst = parse_number<std::size_t>(f[3], "tests_worst");
      r.metrics.tests_per_sample = parse_number<double>(f[4], "tests_per_sample");
      r.metrics.steps_worst = parse_number<std::size_t>(f[5], "steps_worst");
      r.metrics.max_group_size = parse_number<std::size_t>(f[6], "max_group_size");
      r.metrics.exact = f[7] == "true";
    }
    r.infeasible_reason = f[8];
    rows.push_back(std::move(r));
  }
  return rows;
}

ExportFilter parse_export_filter(std::string_view text) {
  ExportFilter f;
  if (text.empty()) return f;
  for (const auto& part : split(text, ',')) {
    if (part.empty()) continue;
    const auto eq = part.find('=');
    if (eq == std::string::npos) throw InputError("filter term '" + part + "' lacks '='");
    const std::string key = part.substr(0, eq);
    const std::string value = part.substr(eq + 1);
    if (key == "method" || key == "methods") {
      for (auto& m : split(value, '+')) f.methods.push_back(parse_method_spec(m).label());
    } else if (key == "S") {
      const auto dash = value.find('-');
      if (dash == std::string::npos) {
        f.s_min = f.s_max = parse_number<std::size_t>(value, "S");
      } else {
        f.s_min = parse_number<std::size_t>(std::string_view(value).substr(0, dash), "S");
        f.s_max = parse_number<std::size_t>(std::string_view(value).substr(dash + 1), "S");
      }
    } else if (key == "D") {
      for (auto& d : split(value, '+')) f.d_values.push_back(parse_number<int>(d, "D"));
    } else if (key == "metric") {
      if (value != "all" && std::find(std::begin(kExportMetrics), std::end(kExportMetrics), value) ==
                                std::end(kExportMetrics)) {
        throw InputError("unknown metric '" + value + "'");
      }
      f.metric = value;
    } else {
      throw InputError("unknown filter key '" + key + "'");
    }
  }
  return f;
}

ExportTable export_comparison(const std::vector<MetricsRow>& rows, const ExportFilter& filter) {
  ExportTable t;
  t.header = {"method", "S", "D", "metric", "value"};
  auto method_ok = [&](const std::string& m) {
    return filter.methods.empty() || std::find(filter.methods.begin(), filter.methods.end(), m) != filter.methods.end();
  };
  auto d_ok = [&](int d) {
    return filter.d_values.empty() || std::find(filter.d_values.begin(), filter.d_values.end(), d) != filter.d_values.end();
  };
  std::vector<std::string_view> metrics;
  if (filter.metric == "all") {
    metrics.assign(std::begin(kExportMetrics), std::end(kExportMetrics));
  } else {
    metrics.push_back(filter.metric);
  }

  std::set<std::tuple<std::string, std::size_t, int>> present;
  for (const auto& r : rows) {
    if (!method_ok(r.method) || !d_ok(r.differentiate) || r.samples < filter.s_min || r.samples > filter.s_max) {
      continue;
    }
    const std::string key = r.method + "," + std::to_string(r.samples) + "," + std::to_string(r.differentiate);
    if (!r.feasible) {
      t.missing.push_back(key + " (" + r.infeasible_reason + ")");
      continue;
    }
    present.insert({r.method, r.samples, r.differentiate});
    for (auto metric : metrics) {
      std::string value;
      if (metric == "tests") value = std::to_string(r.metrics.tests_worst);
      if (metric == "tests_per_sample") value = format_ratio(r.metrics.tests_per_sample);
      if (metric == "steps") value = std::to_string(r.metrics.steps_worst);
      if (metric == "max_group_size") value = std::to_string(r.metrics.max_group_size);
      t.rows.push_back({r.method, std::to_string(r.samples), std::to_string(r.differentiate), std::string(metric), value});
    }
  }
  // A fully specified filter names its grid, so absent cells can be listed.
  if (!filter.methods.empty() && !filter.d_values.empty() && filter.s_max != static_cast<std::size_t>(-1)) {
    for (const auto& m : filter.methods) {
      for (int d : filter.d_values) {
        for (std::size_t s = filter.s_min; s <= filter.s_max; ++s) {
          const bool infeasible = std::any_of(rows.begin(), rows.end(), [&](const MetricsRow& r) {
            return r.method == m && r.samples == s && r.differentiate == d;
          });
          if (!present.count({m, s, d}) && !infeasible) {
            t.missing.push_back(m + "," + std::to_string(s) + "," + std::to_string(d) + " (absent)");
          }
        }
      }
    }
  }
  return t;
}

std::string to_csv(const ExportTable& t) {
  auto join = [](const std::vector<std::string>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
    return s + "\n";
  };
  std::string out = join(t.header);
  for (const auto& r : t.rows) out += join(r);
  return out;
}

Json to_json(const ExportTable& t) {
  Json j;
  j["header"] = t.header;
  j["rows"] = t.rows;
  j["missing"] = t.missing;
  return j;
}

}  // namespace pooldesign
