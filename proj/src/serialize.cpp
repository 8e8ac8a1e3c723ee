#include "pooldesign/serialize.hpp"

#include <algorithm>

namespace pooldesign {
namespace {

template <class T>
T get_field(const Json& doc, const char* key) {
  if (!doc.is_object() || !doc.contains(key)) {
    throw InputError(std::string("missing field '") + key + "'");
  }
  try {
    return doc.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InputError(std::string("field '") + key + "' has the wrong type");
  }
}

struct ParamsWriter {
  Json operator()(const HierarchicalParams& p) const {
    Json policy = Json::array();
    for (const auto& r : p.policy) policy.push_back(Json::array({r.size, r.budget, r.arity}));
    return Json{{"split_policy", policy}};
  }
  Json operator()(const MatrixParams& p) const {
    return Json{{"rows", p.rows}, {"columns", p.columns}};
  }
  Json operator()(const MultidimParams& p) const {
    return Json{{"dims", p.dims}, {"side_lengths", p.side_lengths}, {"eta", p.eta}};
  }
  Json operator()(const BinaryParams& p) const { return Json{{"bits", p.bits}}; }
  Json operator()(const RandomParams& p) const {
    return Json{{"pools", p.pools},         {"pool_size", p.pool_size},
                {"seed", p.seed},           {"trial", p.trial},
                {"trials", p.trials},       {"fitness_tests", p.fitness_tests}};
  }
  Json operator()(const StdParams& p) const {
    return Json{{"q", p.q}, {"gamma", p.gamma}, {"layers", p.layers}};
  }
  Json operator()(const CrParams& p) const {
    Json primes = Json::array();
    for (const auto& pp : p.primes) primes.push_back(Json::array({pp.prime, pp.exponent}));
    return Json{{"primes", primes}, {"block_sizes", p.block_sizes()}};
  }
  Json operator()(const CrSpecialParams& p) const {
    return Json{{"base", p.base}, {"digits", p.digits}};
  }
};

DesignParams params_from_json(Method method, const Json& doc) {
  if (!doc.is_object()) throw InputError("params must be an object");
  switch (method) {
    case Method::hierarchical: {
      HierarchicalParams p;
      for (const auto& rule : get_field<Json>(doc, "split_policy")) {
        if (!rule.is_array() || rule.size() != 3) throw InputError("bad split rule");
        p.policy.push_back({rule[0].get<std::size_t>(), rule[1].get<int>(),
                            rule[2].get<std::size_t>()});
      }
      if (!std::is_sorted(p.policy.begin(), p.policy.end(), [](const auto& a, const auto& b) {
            return std::pair{a.size, a.budget} < std::pair{b.size, b.budget};
          })) {
        throw InputError("split policy must be sorted by (size, budget)");
      }
      return p;
    }
    case Method::matrix:
      return MatrixParams{get_field<std::size_t>(doc, "rows"),
                          get_field<std::size_t>(doc, "columns")};
    case Method::multidim:
      return MultidimParams{get_field<int>(doc, "dims"),
                            get_field<std::vector<std::size_t>>(doc, "side_lengths"),
                            get_field<int>(doc, "eta")};
    case Method::binary: return BinaryParams{get_field<int>(doc, "bits")};
    case Method::random:
      return RandomParams{get_field<std::size_t>(doc, "pools"),
                          get_field<std::size_t>(doc, "pool_size"),
                          get_field<std::uint64_t>(doc, "seed"),
                          get_field<int>(doc, "trial"),
                          get_field<int>(doc, "trials"),
                          get_field<std::size_t>(doc, "fitness_tests")};
    case Method::shifted_transversal:
      return StdParams{get_field<std::uint64_t>(doc, "q"), get_field<int>(doc, "gamma"),
                       get_field<int>(doc, "layers")};
    case Method::cr:
    case Method::cr_backtrack: {
      CrParams p;
      for (const auto& pp : get_field<Json>(doc, "primes")) {
        if (!pp.is_array() || pp.size() != 2) throw InputError("bad prime entry");
        p.primes.push_back({pp[0].get<std::uint64_t>(), pp[1].get<int>()});
      }
      return p;
    }
    case Method::cr_special2:
    case Method::cr_special3:
      return CrSpecialParams{get_field<int>(doc, "base"), get_field<int>(doc, "digits")};
  }
  throw InputError("unsupported method");
}

Json pools_json(const PoolAssignment& pa) {
  Json pools = Json::array();
  for (std::size_t w = 0; w < pa.pools(); ++w) pools.push_back(pa.samples_of_pool(w));
  return pools;
}

PoolAssignment pools_from_json(const Json& doc, std::size_t samples) {
  if (!doc.is_array()) throw InputError("pools must be an array");
  std::vector<SampleSet> pools;
  for (const auto& pool : doc) {
    if (!pool.is_array()) throw InputError("each pool must be an array of sample indices");
    SampleSet set;
    for (const auto& s : pool) {
      if (!s.is_number_integer() || s.get<long long>() < 0) {
        throw InputError("sample indices must be non-negative integers");
      }
      set.push_back(s.get<std::size_t>());
    }
    pools.push_back(std::move(set));
  }
  return PoolAssignment(samples, std::move(pools));
}

}  // namespace

Json params_to_json(const DesignParams& params) { return std::visit(ParamsWriter{}, params); }

Json to_json(const RoundPlan& round) {
  return Json{{"round_index", round.round_index}, {"pools", pools_json(round.pools)}};
}

Json to_json(const PoolResults& results) {
  return Json{{"round_index", results.round_index},
              {"outcomes", format_outcomes(results.outcomes)}};
}

Json to_json(const PoolingDesign& design) {
  Json doc;
  doc["schema_version"] = kDesignSchemaVersion;
  doc["method"] = to_string(design.method);
  doc["samples"] = design.samples;
  doc["differentiate"] = design.differentiate;
  doc["adaptivity"] = to_string(design.adaptivity);
  doc["params"] = params_to_json(design.params);
  doc["rounds"] = Json::array({to_json(RoundPlan{0, design.round0})});
  return doc;
}

RoundPlan round_from_json(const Json& doc, std::size_t samples) {
  return RoundPlan{get_field<int>(doc, "round_index"),
                   pools_from_json(get_field<Json>(doc, "pools"), samples)};
}

PoolResults results_from_json(const Json& doc) {
  return PoolResults{get_field<int>(doc, "round_index"),
                     parse_outcomes(get_field<std::string>(doc, "outcomes"))};
}

PoolingDesign design_from_json(const Json& doc) {
  if (!doc.is_object()) throw InputError("design document must be a JSON object");
  const auto version = get_field<std::string>(doc, "schema_version");
  if (version != kDesignSchemaVersion) {
    throw InputError("unsupported schema_version '" + version + "'");
  }
  PoolingDesign design;
  design.method = parse_method(get_field<std::string>(doc, "method"));
  const auto samples = get_field<long long>(doc, "samples");
  if (samples < 1) throw InputError("samples must be positive");
  design.samples = static_cast<std::size_t>(samples);
  design.differentiate = get_field<int>(doc, "differentiate");
  design.adaptivity = parse_adaptivity(get_field<std::string>(doc, "adaptivity"));
  design.params = params_from_json(design.method, get_field<Json>(doc, "params"));
  const auto rounds = get_field<Json>(doc, "rounds");
  if (!rounds.is_array() || rounds.size() != 1) {
    throw InputError("design document must carry exactly one planned round");
  }
  auto round = round_from_json(rounds[0], design.samples);
  if (round.round_index != 0) throw InputError("first round must have round_index 0");
  design.round0 = std::move(round.pools);
  validate(design);
  return design;
}

std::string serialize(const PoolingDesign& design) { return to_json(design).dump() + "\n"; }

PoolingDesign deserialize(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("malformed design document: ") + e.what());
  }
  return design_from_json(doc);
}

std::vector<bool> parse_outcomes(std::string_view text) {
  std::vector<bool> out;
  for (char c : text) {
    switch (c) {
      case '1':
      case '+': out.push_back(true); break;
      case '0':
      case '-': out.push_back(false); break;
      case ' ':
      case ',':
      case '\t':
      case '\n': break;
      default:
        throw InputError(std::string("invalid outcome character '") + c +
                         "' (use 0/1 or -/+)");
    }
  }
  return out;
}

std::string format_outcomes(const std::vector<bool>& outcomes) {
  std::string out;
  out.reserve(outcomes.size());
  for (bool b : outcomes) out.push_back(b ? '1' : '0');
  return out;
}

Json sample_set_json(const SampleSet& set) { return Json(set); }

SampleSet sample_set_from_json(const Json& doc) {
  if (!doc.is_array()) throw InputError("expected an array of sample indices");
  SampleSet out;
  for (const auto& v : doc) {
    if (!v.is_number_integer() || v.get<long long>() < 0) {
      throw InputError("sample indices must be non-negative integers");
    }
    out.push_back(v.get<std::size_t>());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace pooldesign
