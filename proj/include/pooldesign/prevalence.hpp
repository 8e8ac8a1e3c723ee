#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "pooldesign/evaluate.hpp"
#include "pooldesign/serialize.hpp"

namespace pooldesign {

struct PrevalenceQuery {
  std::size_t samples = 0;
  double prevalence = 0.0;
  int differentiate = 0;
  std::size_t splits = 1;
};

/// P(more than D positives among S) under Binomial(S, rho), summed in log space.
double error_prob_exact(std::size_t samples, double prevalence, int differentiate);

/// Binomial pmf, for identity checks.
double binomial_pmf(std::size_t samples, double prevalence, std::size_t k);

/// Continuity-corrected normal tail 1 - Phi((D + 0.5 - S rho) / sigma).
/// InputError when S rho (1 - rho) == 0.
double error_prob_normal(std::size_t samples, double prevalence, int differentiate);

struct SplitPart {
  std::size_t samples = 0;
  int differentiate = 0;
  double probability = 0.0;
};

struct SplitReport {
  double probability = 0.0;   // 1 - prod(1 - P_i)
  double first_order = 0.0;   // sum P_i
  std::optional<double> normal;  // same combination over normal tails, when defined
  std::vector<SplitPart> parts;
};

/// Parts of size ceil(S/eta) or floor(S/eta); D budgets ceil(D/eta) or
/// floor(D/eta) go to the larger parts first.
std::vector<SplitPart> split_parts(std::size_t samples, int differentiate, std::size_t splits);
SplitReport error_prob_split(const PrevalenceQuery& q);

struct RecommendOptions {
  int max_differentiate = 4;
  std::size_t min_part_size = 10;
  bool suggest_designs = true;
  EvaluateOptions evaluate;
  BuildOptions build;
};

struct DesignSuggestion {
  std::string metric;
  std::string method;
  double value = 0.0;
};

struct Recommendation {
  bool advisable = false;
  std::string message;
  int differentiate = 0;           // total over all parts
  int differentiate_per_part = 0;
  std::size_t splits = 1;
  std::vector<SplitPart> parts;
  double probability = 0.0;
  std::vector<DesignSuggestion> suggestions;
};

/// Smallest D <= max at eta = 1; otherwise the smallest eta with a per-part
/// D <= max; otherwise not advisable.
Recommendation recommend(std::size_t samples, double prevalence, double tolerance,
                         const RecommendOptions& options = {});

Json to_json(const SplitReport& r);
Json to_json(const Recommendation& r);

/// Full error-rate answer: exact (or split) probability, normal
/// approximation, first-order split value and the parts.
Json error_rate_json(const PrevalenceQuery& q);

}  // namespace pooldesign
