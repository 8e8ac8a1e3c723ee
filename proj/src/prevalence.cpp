#include "pooldesign/prevalence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pooldesign {
namespace {

void check_query(std::size_t samples, double prevalence, int differentiate) {
  if (samples == 0) throw InputError("samples must be positive");
  if (!(prevalence >= 0.0 && prevalence <= 1.0)) throw InputError("prevalence must lie in [0, 1]");
  if (differentiate < 0) throw InputError("differentiate must be non-negative");
}

double log_pmf(std::size_t n, double p, std::size_t k) {
  const double nn = static_cast<double>(n);
  const double kk = static_cast<double>(k);
  return std::lgamma(nn + 1) - std::lgamma(kk + 1) - std::lgamma(nn - kk + 1) + kk * std::log(p) +
         (nn - kk) * std::log1p(-p);
}

}  // namespace

double binomial_pmf(std::size_t samples, double prevalence, std::size_t k) {
  if (k > samples) return 0.0;
  if (prevalence == 0.0) return k == 0 ? 1.0 : 0.0;
  if (prevalence == 1.0) return k == samples ? 1.0 : 0.0;
  return std::exp(log_pmf(samples, prevalence, k));
}

double error_prob_exact(std::size_t samples, double prevalence, int differentiate) {
  check_query(samples, prevalence, differentiate);
  const auto d = static_cast<std::size_t>(differentiate);
  if (d >= samples || prevalence == 0.0) return 0.0;
  if (prevalence == 1.0) return 1.0;
  // Summed from the top down so the result is monotone in D bit for bit.
  double tail = 0.0;
  for (std::size_t k = samples; k > d; --k) tail += binomial_pmf(samples, prevalence, k);
  return std::min(tail, 1.0);
}

double error_prob_normal(std::size_t samples, double prevalence, int differentiate) {
  check_query(samples, prevalence, differentiate);
  const double mean = static_cast<double>(samples) * prevalence;
  const double var = mean * (1.0 - prevalence);
  if (!(var > 0.0)) throw InputError("normal approximation undefined for zero variance; use the exact form");
  const double z = (static_cast<double>(differentiate) + 0.5 - mean) / std::sqrt(var);
  return 0.5 * std::erfc(z / std::sqrt(2.0));
}

std::vector<SplitPart> split_parts(std::size_t samples, int differentiate, std::size_t splits) {
  if (splits == 0 || splits > samples) throw InputError("splits must lie in [1, samples]");
  if (differentiate < 0) throw InputError("differentiate must be non-negative");
  const auto d = static_cast<std::size_t>(differentiate);
  std::vector<SplitPart> parts(splits);
  for (std::size_t i = 0; i < splits; ++i) {
    parts[i].samples = samples / splits + (i < samples % splits ? 1 : 0);
    parts[i].differentiate = static_cast<int>(d / splits + (i < d % splits ? 1 : 0));
  }
  return parts;
}

SplitReport error_prob_split(const PrevalenceQuery& q) {
  check_query(q.samples, q.prevalence, q.differentiate);
  SplitReport r;
  r.parts = split_parts(q.samples, q.differentiate, q.splits);
  double keep = 1.0;
  double keep_normal = 1.0;
  bool normal_ok = true;
  for (auto& part : r.parts) {
    part.probability = error_prob_exact(part.samples, q.prevalence, part.differentiate);
    keep *= 1.0 - part.probability;
    r.first_order += part.probability;
    try {
      keep_normal *= 1.0 - error_prob_normal(part.samples, q.prevalence, part.differentiate);
    } catch (const InputError&) {
      normal_ok = false;
    }
  }
  r.probability = q.splits == 1 ? r.parts.front().probability : 1.0 - keep;
  if (normal_ok) r.normal = 1.0 - keep_normal;
  return r;
}

Recommendation recommend(std::size_t samples, double prevalence, double tolerance,
                         const RecommendOptions& options) {
  check_query(samples, prevalence, 0);
  if (!(tolerance > 0.0 && tolerance < 1.0)) throw InputError("tolerance must lie in (0, 1)");
  if (options.max_differentiate < 1) throw InputError("max differentiate must be at least 1");

  Recommendation rec;
  auto accept = [&](std::size_t splits, int per_part) {
    const PrevalenceQuery q{samples, prevalence, per_part * static_cast<int>(splits), splits};
    const auto report = error_prob_split(q);
    if (report.probability > tolerance) return false;
    rec.advisable = true;
    rec.splits = splits;
    rec.differentiate_per_part = per_part;
    rec.differentiate = q.differentiate;
    rec.parts = report.parts;
    rec.probability = report.probability;
    return true;
  };

  bool found = false;
  for (int d = 1; d <= options.max_differentiate && !found; ++d) found = accept(1, d);
  for (std::size_t eta = 2; !found && eta * options.min_part_size <= samples; ++eta) {
    for (int d = 1; d <= options.max_differentiate && !found; ++d) found = accept(eta, d);
  }
  if (!found) {
    rec.message = "group testing not advisable at this prevalence and tolerance";
    return rec;
  }
  rec.message = rec.splits == 1 ? "single experiment"
                                : "split into " + std::to_string(rec.splits) + " experiments";
  if (!options.suggest_designs) return rec;

  const std::size_t part = rec.parts.front().samples;
  const int d = rec.differentiate_per_part;
  struct Best {
    std::string method;
    double value = std::numeric_limits<double>::infinity();
  } tests, group, steps;
  for (const auto& spec : comparison_methods()) {
    if (!supports_differentiate(spec.method, d)) continue;
    try {
      const auto m = metrics(build(spec, part, d, options.build), options.evaluate);
      auto offer = [&](Best& b, double v) {
        if (v < b.value) b = {spec.label(), v};
      };
      offer(tests, static_cast<double>(m.tests_worst));
      offer(group, static_cast<double>(m.max_group_size));
      offer(steps, static_cast<double>(m.steps_worst));
    } catch (const Error&) {
      // Methods without a design at this size are simply not suggested.
    }
  }
  for (auto [name, b] : {std::pair{"tests", tests}, std::pair{"group_size", group}, std::pair{"steps", steps}}) {
    if (!b.method.empty()) rec.suggestions.push_back({name, b.method, b.value});
  }
  return rec;
}

namespace {

Json parts_json(const std::vector<SplitPart>& parts) {
  Json arr = Json::array();
  for (const auto& p : parts) {
    arr.push_back({{"samples", p.samples}, {"differentiate", p.differentiate}, {"probability", p.probability}});
  }
  return arr;
}

}  // namespace

Json to_json(const SplitReport& r) {
  Json j;
  j["probability"] = r.probability;
  j["first_order"] = r.first_order;
  j["normal"] = r.normal ? Json(*r.normal) : Json(nullptr);
  j["parts"] = parts_json(r.parts);
  return j;
}

Json to_json(const Recommendation& r) {
  Json j;
  j["advisable"] = r.advisable;
  j["message"] = r.message;
  if (r.advisable) {
    j["differentiate"] = r.differentiate;
    j["differentiate_per_part"] = r.differentiate_per_part;
    j["splits"] = r.splits;
    j["probability"] = r.probability;
    j["parts"] = parts_json(r.parts);
    j["suggestions"] = Json::array();
    for (const auto& s : r.suggestions) {
      j["suggestions"].push_back({{"metric", s.metric}, {"method", s.method}, {"value", s.value}});
    }
  }
  return j;
}

Json error_rate_json(const PrevalenceQuery& q) {
  const auto r = error_prob_split(q);
  Json j;
  j["samples"] = q.samples;
  j["prevalence"] = q.prevalence;
  j["differentiate"] = q.differentiate;
  j["splits"] = q.splits;
  j["exact"] = r.probability;
  j["normal"] = r.normal ? Json(*r.normal) : Json(nullptr);
  j["approximation"] = true;
  j["first_order"] = r.first_order;
  j["parts"] = parts_json(r.parts);
  return j;
}

}  // namespace pooldesign
