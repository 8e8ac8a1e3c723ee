#include "pooldesign/api.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "pooldesign/constructors.hpp"

namespace pooldesign::api {
namespace fs = std::filesystem;

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::bad_input: return 2;
    case ErrorCode::infeasible: return 3;
    case ErrorCode::inconclusive: return 4;
    case ErrorCode::not_found: return 5;
    case ErrorCode::internal: return 1;
  }
  return 1;
}

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::bad_input: return 400;
    case ErrorCode::not_found: return 404;
    case ErrorCode::infeasible:
    case ErrorCode::inconclusive: return 422;
    case ErrorCode::internal: return 500;
  }
  return 500;
}

Json error_json(ErrorCode code, const std::string& message, const Json& details) {
  return Json{{"error", {{"code", to_string(code)}, {"message", message}, {"details", details}}}};
}

Json guarded(const std::function<Json()>& f) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("bad request document: ") + e.what());
  }
}

namespace {

template <class T>
T field(const Json& req, const char* key) {
  if (!req.is_object() || !req.contains(key)) throw InputError(std::string("missing field '") + key + "'");
  try {
    return req.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InputError(std::string("field '") + key + "' has the wrong type");
  }
}

template <class T>
T field_or(const Json& req, const char* key, T fallback) {
  if (!req.is_object() || !req.contains(key) || req.at(key).is_null()) return fallback;
  return field<T>(req, key);
}

std::size_t positive_size(const Json& req, const char* key) {
  const auto v = field<long long>(req, key);
  if (v < 1) throw InputError(std::string("field '") + key + "' must be positive");
  return static_cast<std::size_t>(v);
}

std::vector<bool> outcomes_from(const Json& v) {
  if (v.is_string()) return parse_outcomes(v.get<std::string>());
  if (v.is_array()) {
    std::vector<bool> out;
    for (const auto& x : v) {
      if (x.is_boolean()) {
        out.push_back(x.get<bool>());
      } else if (x.is_number_integer() && (x.get<int>() == 0 || x.get<int>() == 1)) {
        out.push_back(x.get<int>() == 1);
      } else {
        throw InputError("results array entries must be booleans or 0/1");
      }
    }
    return out;
  }
  throw InputError("results must be a string of 0/1 or -/+ or an array");
}

}  // namespace

Json methods_json() {
  Json arr = Json::array();
  for (Method m : kAllMethods) {
    Json entry;
    entry["method"] = to_string(m);
    entry["adaptivity"] = to_string(adaptivity_of(m));
    if (m == Method::cr_special2) {
      entry["differentiate"] = Json::array({2});
    } else if (m == Method::cr_special3) {
      entry["differentiate"] = Json::array({3});
    } else {
      entry["differentiate"] = "any";
    }
    if (m == Method::multidim) entry["dims"] = "N >= 2, S >= 2^N";
    arr.push_back(entry);
  }
  return arr;
}

PoolingDesign design_from_request(const Json& req) {
  auto spec = parse_method_spec(field<std::string>(req, "method"));
  if (spec.method == Method::multidim && req.contains("dims")) spec.dims = field<int>(req, "dims");
  const std::size_t samples = positive_size(req, "samples");
  const int fallback = spec.method == Method::cr_special2 ? 2 : spec.method == Method::cr_special3 ? 3 : 1;
  const int d = field_or<int>(req, "differentiate", fallback);
  BuildOptions opts;
  opts.seed = field_or<std::uint64_t>(req, "seed", 0);
  return build(spec, samples, d, opts);
}

Json to_json(const DecodeOutcome& o) {
  Json j;
  j["kind"] = to_string(o.kind);
  j["positives"] = o.kind == OutcomeKind::resolved ? sample_set_json(o.positives) : Json(nullptr);
  j["next"] = o.next ? pooldesign::to_json(*o.next) : Json(nullptr);
  j["candidates"] = sample_set_json(o.candidates);
  j["reason"] = o.reason == InconclusiveReason::none ? Json(nullptr) : Json(to_string(o.reason));
  return j;
}

Json decode_request(const Json& req) {
  return guarded([&] {
    const auto design = design_from_json(field<Json>(req, "design"));
    RoundPlan round{0, design.round0};
    if (req.contains("round") && !req.at("round").is_null()) round = round_from_json(req.at("round"), design.samples);
    const auto outcomes = outcomes_from(field<Json>(req, "results"));
    return to_json(decode_round(design, round, PoolResults{round.round_index, outcomes}));
  });
}

Json to_json(const SessionState& s) {
  Json j;
  j["schema_version"] = kSessionSchemaVersion;
  j["design"] = pooldesign::to_json(s.design);
  j["history"] = Json::array();
  for (const auto& r : s.history) {
    j["history"].push_back({{"round", pooldesign::to_json(r.plan)}, {"outcomes", format_outcomes(r.results.outcomes)}});
  }
  j["pending"] = s.pending ? pooldesign::to_json(*s.pending) : Json(nullptr);
  j["pending_groups"] = Json::array();
  for (const auto& g : s.pending_groups) j["pending_groups"].push_back(Json::array({g.parent, g.budget}));
  j["confirmed"] = sample_set_json(s.confirmed);
  j["status"] = to_string(s.status);
  j["resolved_positives"] = sample_set_json(s.resolved_positives);
  j["reason"] = s.reason == InconclusiveReason::none ? Json(nullptr) : Json(to_string(s.reason));
  return j;
}

SessionState session_from_json(const Json& doc) {
  return [&] {
    try {
      if (field<std::string>(doc, "schema_version") != kSessionSchemaVersion) {
        throw InputError("unsupported session schema_version");
      }
      SessionState s;
      s.design = design_from_json(field<Json>(doc, "design"));
      for (const auto& h : field<Json>(doc, "history")) {
        auto plan = round_from_json(field<Json>(h, "round"), s.design.samples);
        auto outcomes = parse_outcomes(field<std::string>(h, "outcomes"));
        if (outcomes.size() != plan.pools.pools()) throw InputError("history outcome length mismatch");
        if (plan.round_index != static_cast<int>(s.history.size())) {
          throw InputError("history round indices must be consecutive from 0");
        }
        const int idx = plan.round_index;
        s.history.push_back({std::move(plan), PoolResults{idx, std::move(outcomes)}});
      }
      if (!doc.at("pending").is_null()) s.pending = round_from_json(doc.at("pending"), s.design.samples);
      for (const auto& g : field<Json>(doc, "pending_groups")) {
        s.pending_groups.push_back({g.at(0).get<int>(), g.at(1).get<int>()});
      }
      s.confirmed = sample_set_from_json(field<Json>(doc, "confirmed"));
      const auto status = field<std::string>(doc, "status");
      if (status == "awaiting_results") {
        s.status = SessionStatus::awaiting_results;
      } else if (status == "finished") {
        s.status = SessionStatus::finished;
      } else if (status == "failed") {
        s.status = SessionStatus::failed;
      } else {
        throw InputError("unknown session status '" + status + "'");
      }
      s.resolved_positives = sample_set_from_json(field<Json>(doc, "resolved_positives"));
      const auto& reason = doc.at("reason");
      if (!reason.is_null()) {
        const auto r = reason.get<std::string>();
        if (r == "exceeds_differentiate") {
          s.reason = InconclusiveReason::exceeds_differentiate;
        } else if (r == "contradictory_results") {
          s.reason = InconclusiveReason::contradictory_results;
        } else {
          throw InputError("unknown session reason '" + r + "'");
        }
      }
      if ((s.status == SessionStatus::awaiting_results) != s.pending.has_value()) {
        throw InputError("session pending round does not match its status");
      }
      if (s.design.method == Method::hierarchical && s.pending &&
          s.pending_groups.size() != s.pending->pools.pools()) {
        throw InputError("session pending groups do not match the pending round");
      }
      return s;
    } catch (const nlohmann::json::exception& e) {
      throw InputError(std::string("malformed session document: ") + e.what());
    }
  }();
}

Json session_view(const std::string& id, const SessionState& s) {
  Json j;
  if (!id.empty()) j["id"] = id;
  j["method"] = s.design.label();
  j["samples"] = s.design.samples;
  j["differentiate"] = s.design.differentiate;
  j["status"] = to_string(s.status);
  j["pending"] = s.pending ? pooldesign::to_json(*s.pending) : Json(nullptr);
  j["tests_used"] = s.tests_used();
  j["rounds_used"] = s.rounds_used();
  j["resolved_positives"] = s.status == SessionStatus::finished ? sample_set_json(s.resolved_positives) : Json(nullptr);
  j["reason"] = s.reason == InconclusiveReason::none ? Json(nullptr) : Json(to_string(s.reason));
  j["history"] = Json::array();
  for (const auto& r : s.history) {
    j["history"].push_back({{"round_index", r.plan.round_index},
                            {"pools", pooldesign::to_json(r.plan)["pools"]},
                            {"outcomes", format_outcomes(r.results.outcomes)}});
  }
  return j;
}

std::string fnv1a_hex(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

SessionStore::SessionStore(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

fs::path SessionStore::path_of(const std::string& id) const {
  const bool ok = id.size() == 16 && std::all_of(id.begin(), id.end(), [](char c) {
                    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
                  });
  if (!ok) throw NotFoundError("no session '" + id + "'");
  return dir_ / (id + ".json");
}

std::shared_ptr<std::mutex> SessionStore::lock_for(const std::string& id) {
  std::lock_guard g(table_mutex_);
  auto& slot = locks_[id];
  if (!slot) slot = std::make_shared<std::mutex>();
  return slot;
}

namespace {

void write_atomic(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::internal, "cannot write " + tmp.string());
    out << text;
  }
  fs::rename(tmp, path);
}

}  // namespace

std::pair<std::string, SessionState> SessionStore::create(const PoolingDesign& design) {
  static std::atomic<std::uint64_t> counter{0};
  auto state = session_start(design);
  const std::string doc = pooldesign::serialize(design);
  std::string id;
  for (;;) {
    const auto nonce = std::to_string(std::chrono::system_clock::now().time_since_epoch().count()) + ":" +
                       std::to_string(std::random_device{}()) + ":" + std::to_string(counter++);
    id = fnv1a_hex(doc + nonce);
    if (!fs::exists(path_of(id))) break;
  }
  auto lock = lock_for(id);
  std::lock_guard g(*lock);
  write_atomic(path_of(id), to_json(state).dump() + "\n");
  return {id, std::move(state)};
}

SessionState SessionStore::load(const std::string& id) const {
  const fs::path path = path_of(id);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("no session '" + id + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  Json doc;
  try {
    doc = Json::parse(ss.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::internal, "session file is damaged: " + std::string(e.what()));
  }
  return session_from_json(doc);
}

SessionState SessionStore::submit(const std::string& id, const std::vector<bool>& outcomes) {
  const fs::path path = path_of(id);
  auto lock = lock_for(id);
  std::lock_guard g(*lock);
  auto next = session_submit(load(id), outcomes);
  write_atomic(path, to_json(next).dump() + "\n");
  return next;
}

Json compare(const CompareQuery& q, const EvaluateOptions& eval, const BuildOptions& build_opts) {
  Json rows = Json::array();
  Json excluded = Json::array();
  struct Row {
    std::string label;
    DesignMetrics m;
    Adaptivity a;
  };
  std::vector<Row> kept;
  for (const auto& spec : comparison_methods()) {
    if (!supports_differentiate(spec.method, q.differentiate)) continue;
    try {
      const auto design = build(spec, q.samples, q.differentiate, build_opts);
      const auto m = metrics(design, eval);
      std::vector<std::string> violated;
      if (q.max_group_size && m.max_group_size > *q.max_group_size) violated.push_back("max_group_size");
      if (q.max_steps && m.steps_worst > *q.max_steps) violated.push_back("max_steps");
      if (!violated.empty()) {
        excluded.push_back({{"method", spec.label()}, {"reason", "constraint"}, {"violated", violated},
                            {"max_group_size", m.max_group_size}, {"steps_worst", m.steps_worst}});
        continue;
      }
      kept.push_back({spec.label(), m, design.adaptivity});
    } catch (const Error& e) {
      excluded.push_back({{"method", spec.label()}, {"reason", to_string(e.code())}, {"message", e.what()}});
    }
  }
  std::stable_sort(kept.begin(), kept.end(), [](const Row& a, const Row& b) {
    return a.m.tests_worst < b.m.tests_worst;
  });
  for (const auto& r : kept) {
    rows.push_back({{"method", r.label},
                    {"adaptivity", to_string(r.a)},
                    {"tests_worst", r.m.tests_worst},
                    {"tests_per_sample", r.m.tests_per_sample},
                    {"steps_worst", r.m.steps_worst},
                    {"max_group_size", r.m.max_group_size},
                    {"exact", r.m.exact}});
  }
  Json j;
  j["samples"] = q.samples;
  j["differentiate"] = q.differentiate;
  j["constraints"] = {{"max_group_size", q.max_group_size ? Json(*q.max_group_size) : Json(nullptr)},
                      {"max_steps", q.max_steps ? Json(*q.max_steps) : Json(nullptr)}};
  j["rows"] = rows;
  j["excluded"] = excluded;
  return j;
}

std::string compare_csv(const Json& table) {
  std::string out = "method,adaptivity,tests_worst,tests_per_sample,steps_worst,max_group_size,exact\n";
  for (const auto& r : table.at("rows")) {
    out += r.at("method").get<std::string>() + "," + r.at("adaptivity").get<std::string>() + "," +
           std::to_string(r.at("tests_worst").get<std::size_t>()) + "," +
           format_ratio(r.at("tests_per_sample").get<double>()) + "," +
           std::to_string(r.at("steps_worst").get<std::size_t>()) + "," +
           std::to_string(r.at("max_group_size").get<std::size_t>()) + "," +
           (r.at("exact").get<bool>() ? "true" : "false") + "\n";
  }
  return out;
}

std::string compare_text(const Json& table) {
  char line[160];
  std::string out;
  std::snprintf(line, sizeof line, "%-14s %-18s %6s %8s %6s %6s\n", "method", "adaptivity", "tests",
                "per_smp", "steps", "group");
  out += line;
  for (const auto& r : table.at("rows")) {
    std::snprintf(line, sizeof line, "%-14s %-18s %6zu %8.3f %6zu %6zu\n",
                  r.at("method").get<std::string>().c_str(), r.at("adaptivity").get<std::string>().c_str(),
                  r.at("tests_worst").get<std::size_t>(), r.at("tests_per_sample").get<double>(),
                  r.at("steps_worst").get<std::size_t>(), r.at("max_group_size").get<std::size_t>());
    out += line;
  }
  for (const auto& e : table.at("excluded")) {
    out += "excluded " + e.at("method").get<std::string>() + ": " + e.at("reason").get<std::string>() + "\n";
  }
  return out;
}

Json error_rate_request(const Json& req) {
  return guarded([&] {
    PrevalenceQuery q;
    q.samples = positive_size(req, "samples");
    q.prevalence = field<double>(req, "prevalence");
    q.differentiate = field<int>(req, "differentiate");
    q.splits = field_or<std::size_t>(req, "splits", 1);
    return error_rate_json(q);
  });
}

Json recommend_request(const Json& req) {
  return guarded([&] {
    RecommendOptions opts;
    opts.suggest_designs = field_or<bool>(req, "suggest_designs", true);
    opts.max_differentiate = field_or<int>(req, "max_differentiate", opts.max_differentiate);
    const auto rec = recommend(positive_size(req, "samples"), field<double>(req, "prevalence"),
                               field<double>(req, "tolerance"), opts);
    return pooldesign::to_json(rec);
  });
}

Json sweep_query(const fs::path& root, const std::string& filter) {
  return pooldesign::to_json(export_comparison(read_metrics_csv(root), parse_export_filter(filter)));
}

}  // namespace pooldesign::api
