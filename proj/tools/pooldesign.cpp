// Command-line front end: every subcommand prints the same JSON documents
// the HTTP service returns.

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "pooldesign/api.hpp"
#include "pooldesign/server.hpp"

namespace fs = std::filesystem;
using namespace pooldesign;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json read_json(const std::string& path) {
  try {
    return Json::parse(slurp(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path + " is not valid JSON: " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::internal, "cannot write " + path);
  out << text;
}

void print(const Json& j) { std::cout << j.dump(2) << "\n"; }

Server* g_server = nullptr;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pooled-testing design toolkit"};
  app.require_subcommand(1);
  int rc = 0;

  app.add_subcommand("methods", "List the design methods")->callback([] { print(api::methods_json()); });

  // design
  auto* design_cmd = app.add_subcommand("design", "Build a pooling design");
  std::string method;
  std::size_t samples = 0;
  int differentiate = 0;
  int dims = 0;
  std::uint64_t seed = 0;
  std::string out_path;
  design_cmd->add_option("--method,-m", method, "Method name (multidimN allowed)")->required();
  design_cmd->add_option("--samples,-s", samples, "Number of samples")->required();
  design_cmd->add_option("--differentiate,-d", differentiate, "Positives the design must resolve");
  design_cmd->add_option("--dims", dims, "Dimensions for multidim");
  design_cmd->add_option("--seed", seed, "Seed for the random method");
  design_cmd->add_option("--out,-o", out_path, "Output file (stdout when omitted)");
  design_cmd->callback([&] {
    Json req{{"method", method}, {"samples", samples}, {"seed", seed}};
    if (differentiate) req["differentiate"] = differentiate;
    if (dims) req["dims"] = dims;
    const auto d = api::guarded([&] { return to_json(api::design_from_request(req)); });
    if (out_path.empty()) {
      std::cout << d.dump() << "\n";
    } else {
      write_text(out_path, d.dump() + "\n");
    }
  });

  // decode
  auto* decode_cmd = app.add_subcommand("decode", "Decode one round of pool results");
  std::string design_path, results, round_path;
  decode_cmd->add_option("--design", design_path, "Design document")->required();
  decode_cmd->add_option("--results,-r", results, "Outcomes as 0/1 or -/+")->required();
  decode_cmd->add_option("--round", round_path, "Round plan document (defaults to the first round)");
  decode_cmd->callback([&] {
    Json req{{"design", read_json(design_path)}, {"results", results}};
    if (!round_path.empty()) req["round"] = read_json(round_path);
    const auto out = api::decode_request(req);
    print(out);
    if (out.at("kind") == "inconclusive") rc = api::exit_code(ErrorCode::inconclusive);
  });

  // session
  auto* session_cmd = app.add_subcommand("session", "Run a multi-round session on a state file");
  session_cmd->require_subcommand(1);
  std::string state_path;
  auto* s_new = session_cmd->add_subcommand("new", "Start a session from a design");
  s_new->add_option("--design", design_path, "Design document")->required();
  s_new->add_option("--state", state_path, "Session state file to create")->required();
  s_new->callback([&] {
    const auto state = session_start(design_from_json(read_json(design_path)));
    write_text(state_path, api::to_json(state).dump() + "\n");
    print(api::session_view("", state));
  });
  auto* s_submit = session_cmd->add_subcommand("submit", "Submit results for the pending round");
  s_submit->add_option("--state", state_path, "Session state file")->required();
  s_submit->add_option("--results,-r", results, "Outcomes as 0/1 or -/+")->required();
  s_submit->callback([&] {
    const auto state = api::session_from_json(read_json(state_path));
    const auto next = session_submit(state, parse_outcomes(results));
    write_text(state_path, api::to_json(next).dump() + "\n");
    print(api::session_view("", next));
    if (next.status == SessionStatus::failed) rc = api::exit_code(ErrorCode::inconclusive);
  });
  auto* s_show = session_cmd->add_subcommand("show", "Print the session state");
  s_show->add_option("--state", state_path, "Session state file")->required();
  s_show->callback([&] { print(api::session_view("", api::session_from_json(read_json(state_path)))); });

  // metrics
  auto* metrics_cmd = app.add_subcommand("metrics", "Worst-case tests, steps and group size");
  std::uint64_t budget = EvaluateOptions{}.enumeration_budget;
  std::string format = "json";
  metrics_cmd->add_option("--design", design_path, "Design document")->required();
  metrics_cmd->add_option("--exact-budget", budget, "Positive sets enumerated exhaustively at most");
  metrics_cmd->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  metrics_cmd->callback([&] {
    const auto d = design_from_json(read_json(design_path));
    EvaluateOptions opts;
    opts.enumeration_budget = budget;
    const auto m = metrics(d, opts);
    if (format == "csv") {
      std::cout << kMetricsCsvHeader << "\n" << metrics_csv_row(d.label(), d.samples, d.differentiate, m) << "\n";
    } else {
      print(to_json(m));
    }
  });

  // verify
  auto* verify_cmd = app.add_subcommand("verify", "Check that simulated positives are recovered");
  bool one_step = false;
  verify_cmd->add_option("--design", design_path, "Design document")->required();
  verify_cmd->add_option("--exact-budget", budget, "Positive sets enumerated exhaustively at most");
  verify_cmd->add_flag("--one-step", one_step, "Require the first round alone to decode");
  verify_cmd->callback([&] {
    const auto d = design_from_json(read_json(design_path));
    EvaluateOptions opts;
    opts.enumeration_budget = budget;
    const auto r = one_step ? verify_separable(d, opts) : verify_sessions(d, opts);
    print(to_json(r));
    if (!r.ok) rc = api::exit_code(ErrorCode::inconclusive);
  });

  // compare
  auto* compare_cmd = app.add_subcommand("compare", "Compare every method at (S, D)");
  api::CompareQuery cq;
  std::size_t max_group = 0, max_steps = 0;
  std::string compare_format = "table";
  compare_cmd->add_option("--samples,-s", cq.samples, "Number of samples")->required();
  compare_cmd->add_option("--differentiate,-d", cq.differentiate, "Positives to resolve");
  compare_cmd->add_option("--max-group-size", max_group, "Largest allowed pool");
  compare_cmd->add_option("--max-steps", max_steps, "Most rounds allowed");
  compare_cmd->add_option("--format", compare_format, "json, csv or table")
      ->check(CLI::IsMember({"json", "csv", "table"}));
  compare_cmd->callback([&] {
    if (max_group) cq.max_group_size = max_group;
    if (max_steps) cq.max_steps = max_steps;
    const auto table = api::compare(cq);
    if (compare_format == "json") {
      print(table);
    } else if (compare_format == "csv") {
      std::cout << api::compare_csv(table);
    } else {
      std::cout << api::compare_text(table);
    }
  });

  // error-rate
  auto* err_cmd = app.add_subcommand("error-rate", "Probability of more than D positives");
  double prevalence = 0.0;
  std::size_t splits = 1;
  err_cmd->add_option("--samples,-s", samples, "Number of samples")->required();
  err_cmd->add_option("--prevalence,-p", prevalence, "Expected prevalence in [0, 1]")->required();
  err_cmd->add_option("--differentiate,-d", differentiate, "Positives the design resolves")->required();
  err_cmd->add_option("--splits", splits, "Independent experiments to split into");
  err_cmd->callback([&] {
    print(api::error_rate_request(
        {{"samples", samples}, {"prevalence", prevalence}, {"differentiate", differentiate}, {"splits", splits}}));
  });

  // recommend
  auto* rec_cmd = app.add_subcommand("recommend", "Pick D and a split count for an error tolerance");
  double tolerance = 0.0;
  bool no_designs = false;
  rec_cmd->add_option("--samples,-s", samples, "Number of samples")->required();
  rec_cmd->add_option("--prevalence,-p", prevalence, "Expected prevalence in [0, 1]")->required();
  rec_cmd->add_option("--tolerance,-t", tolerance, "Acceptable error probability")->required();
  rec_cmd->add_flag("--no-designs", no_designs, "Skip per-method design suggestions");
  rec_cmd->callback([&] {
    print(api::recommend_request(
        {{"samples", samples}, {"prevalence", prevalence}, {"tolerance", tolerance}, {"suggest_designs", !no_designs}}));
  });

  // rank
  auto* rank_cmd = app.add_subcommand("rank", "Rank methods by an averaged metric");
  std::string metric = "tests";
  RankOptions rank_opts;
  int rank_d = 1;
  rank_cmd->add_option("--metric", metric, "tests, group_size, steps or high_prevalence_scaling");
  rank_cmd->add_option("--differentiate,-d", rank_d, "D for the tests and group_size metrics");
  rank_cmd->add_option("--s-min", rank_opts.s_min, "Smallest S");
  rank_cmd->add_option("--s-max", rank_opts.s_max, "Largest S");
  rank_cmd->callback([&] { print(to_json(rank_methods(parse_rank_metric(metric), rank_d, rank_opts))); });

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "Precompute designs and metrics over a grid");
  std::string manifest_path, sweep_out;
  std::size_t threads = 0;
  sweep_cmd->add_option("--manifest", manifest_path, "Manifest file (default grid when omitted)");
  sweep_cmd->add_option("--out,-o", sweep_out, "Output root (overrides the manifest)");
  sweep_cmd->add_option("--threads", threads, "Worker threads (0 = all cores)");
  sweep_cmd->callback([&] {
    auto m = manifest_path.empty() ? default_manifest() : manifest_from_json(read_json(manifest_path));
    if (!sweep_out.empty()) m.output_root = sweep_out;
    if (threads) m.threads = threads;
    print(to_json(run_sweep(m)));
  });

  // export
  auto* export_cmd = app.add_subcommand("export", "Long-format comparison tables from a sweep");
  std::string root, filter, export_format = "csv";
  export_cmd->add_option("--root", root, "Sweep output root")->required();
  export_cmd->add_option("--filter", filter, "e.g. D=1,metric=tests,S=20-100,method=binary+matrix");
  export_cmd->add_option("--format", export_format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  export_cmd->callback([&] {
    const auto table = export_comparison(read_metrics_csv(root), parse_export_filter(filter));
    if (export_format == "json") {
      print(to_json(table));
    } else {
      std::cout << to_csv(table);
      for (const auto& m : table.missing) std::cerr << "missing " << m << "\n";
    }
  });

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "Run the local HTTP JSON service");
  std::optional<int> port;
  ServerOptions sopts;
  serve_cmd->add_option("--port", port, "Port (POOLDESIGN_PORT or 8090 when omitted)");
  serve_cmd->add_option("--host", sopts.host, "Interface to bind");
  serve_cmd->add_option("--sessions", sopts.session_dir, "Session store directory");
  serve_cmd->add_option("--sweep-root", sopts.sweep_root, "Sweep output root to serve");
  serve_cmd->add_option("--static", sopts.static_dir, "Static UI bundle to serve at /");
  serve_cmd->callback([&] {
    sopts.port = resolve_port(port);
    Server server(sopts);
    const int bound = server.bind();
    std::cerr << "listening on http://" << sopts.host << ":" << bound << "\n";
    g_server = &server;
    std::signal(SIGINT, [](int) { if (g_server) g_server->stop(); });
    std::signal(SIGTERM, [](int) { if (g_server) g_server->stop(); });
    server.listen();
    g_server = nullptr;
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : api::exit_code(ErrorCode::bad_input);
  } catch (const Error& e) {
    std::cerr << api::error_json(e.code(), e.what()).dump(2) << "\n";
    return api::exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << api::error_json(ErrorCode::internal, e.what()).dump(2) << "\n";
    return api::exit_code(ErrorCode::internal);
  }
  return rc;
}
