#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "refract/model_io.hpp"

namespace refract {

inline constexpr const char* kToolVersion = "0.1.0";

/// Occupation functional selected by a case.
enum class Which { both, up, down, total };

const char* to_string(Which w);
Which which_from_string(const std::string& s);

struct ValidationCase {
    std::string id;
    std::string fixture;
    Which which = Which::both;
    double theta = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    std::size_t n = 10000;
    /// "exact" or "euler"
    std::string scheme = "exact";
    double h = 1e-3;
    /// Multiplies the analytic value; 1 except in sensitivity checks.
    double analytic_factor = 1.0;
};

struct ValidationConfig {
    std::uint64_t seed = 0;
    std::map<std::string, json> fixtures;
    std::vector<ValidationCase> cases;
};

ValidationConfig validation_config_from_json(const json& j);
json validation_config_to_json(const ValidationConfig& c);

struct CaseRecord {
    std::string id;
    std::string fixture;
    std::string which;
    double theta = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    std::string scheme;
    std::size_t n = 0;
    double analytic = 0.0;
    double mc_mean = 0.0;
    double mc_stderr = 0.0;
    double bias_bound = 0.0;
    double band = 0.0;
    std::optional<double> z_score;
    std::size_t horizon_hits = 0;
    bool pass = false;
    std::string error;
};

struct ValidationReport {
    std::string tool_version = kToolVersion;
    std::string timestamp;
    json config;
    std::vector<CaseRecord> cases;
    std::size_t passed = 0;
    std::size_t failed = 0;
};

/// Runs every case; `seed` overrides the config seed when given. Cases sharing
/// fixture and scheme share Monte Carlo paths. Records are sorted by id.
ValidationReport run_validation(const ValidationConfig& config, std::optional<std::uint64_t> seed = std::nullopt);

/// Report body; the timestamp is the only field that varies between identical runs.
json report_to_json(const ValidationReport& r);

}  // namespace refract
