#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "pooldesign/core.hpp"

namespace pooldesign {

using Json = nlohmann::ordered_json;

inline constexpr std::string_view kDesignSchemaVersion = "pooldesign.design/1";

Json to_json(const PoolingDesign& design);
Json to_json(const RoundPlan& round);
Json to_json(const PoolResults& results);
Json params_to_json(const DesignParams& params);

/// Rejects unknown schema versions and any invariant violation.
PoolingDesign design_from_json(const Json& doc);
RoundPlan round_from_json(const Json& doc, std::size_t samples);
PoolResults results_from_json(const Json& doc);

/// Canonical byte-stable text form: compact JSON followed by a newline.
std::string serialize(const PoolingDesign& design);
PoolingDesign deserialize(std::string_view text);

/// Parses outcome strings such as "0110" or "-++-". Spaces and commas are
/// ignored; anything else is an InputError.
std::vector<bool> parse_outcomes(std::string_view text);
std::string format_outcomes(const std::vector<bool>& outcomes);

Json sample_set_json(const SampleSet& set);
SampleSet sample_set_from_json(const Json& doc);

}  // namespace pooldesign
