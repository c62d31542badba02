#pragma once

#include <string>

#include <json.hpp>

#include "refract/levy_model.hpp"

namespace refract {

using json = nlohmann::ordered_json;

/// Parses JSON text; syntax errors become ConfigError "source:line:col: ...".
json parse_json_text(const std::string& text, const std::string& source);
json read_json_file(const std::string& path);

/// {"type": "none"} or {"type": "compound-poisson", "rate": r, "law": {...}}
JumpSpec jumps_from_json(const json& j);
json jumps_to_json(const JumpSpec& jumps);

/// {"gamma", "sigma2", "jumps"}; extra keys "delta" and "b" are ignored here.
LevyModel levy_from_json(const json& j);
/// {"gamma", "sigma2", "jumps", "delta", "b"}; delta and b default to 0.
RefractedModel model_from_json(const json& j);
json model_to_json(const RefractedModel& m);

RefractedModel read_model_file(const std::string& path);

/// Parses "inf", "-inf" and plain numbers.
double parse_level(const std::string& s);

}  // namespace refract
