#include "refract/validation.hpp"

#include <algorithm>
#include <cmath>
#include <ctime>
#include <set>
#include <tuple>

#include "refract/errors.hpp"
#include "refract/occupation.hpp"
#include "refract/simulator.hpp"

namespace refract {

const char* to_string(Which w) {
    switch (w) {
        case Which::both: return "both";
        case Which::up: return "up";
        case Which::down: return "down";
        case Which::total: return "total";
    }
    return "?";
}

Which which_from_string(const std::string& s) {
    if (s == "both") return Which::both;
    if (s == "up") return Which::up;
    if (s == "down") return Which::down;
    if (s == "total") return Which::total;
    throw ConfigError("which must be one of both, up, down, total (got \"" + s + "\")");
}

namespace {

double num(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key) || !j.at(key).is_number())
        throw ConfigError(where + ": field \"" + key + "\" must be a number");
    return j.at(key).get<double>();
}

std::uint64_t unsigned_field(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key) || !j.at(key).is_number_unsigned())
        throw ConfigError(where + ": field \"" + key + "\" must be a non-negative integer");
    return j.at(key).get<std::uint64_t>();
}

std::string str(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key) || !j.at(key).is_string())
        throw ConfigError(where + ": field \"" + key + "\" must be a string");
    return j.at(key).get<std::string>();
}

ValidationCase case_from_json(const json& j, std::size_t index) {
    const std::string where = "cases[" + std::to_string(index) + "]";
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    static const std::set<std::string> known{"id", "fixture", "which", "theta", "lo", "hi",
                                             "n", "scheme", "h", "analytic_factor"};
    for (const auto& [k, v] : j.items())
        if (!known.count(k)) throw ConfigError(where + ": unknown field \"" + k + "\"");
    ValidationCase c;
    c.id = str(j, "id", where);
    c.fixture = str(j, "fixture", where);
    c.which = which_from_string(str(j, "which", where));
    c.theta = num(j, "theta", where);
    const bool need_lo = c.which == Which::both || c.which == Which::down;
    const bool need_hi = c.which == Which::both || c.which == Which::up;
    c.lo = need_lo ? num(j, "lo", where) : -kInf;
    c.hi = need_hi ? num(j, "hi", where) : kInf;
    if (!need_lo && j.contains("lo")) throw ConfigError(where + ": \"lo\" is not used by which=" + to_string(c.which));
    if (!need_hi && j.contains("hi")) throw ConfigError(where + ": \"hi\" is not used by which=" + to_string(c.which));
    c.n = unsigned_field(j, "n", where);
    c.scheme = str(j, "scheme", where);
    if (c.scheme != "exact" && c.scheme != "euler") throw ConfigError(where + ": scheme must be exact or euler");
    if (j.contains("h")) c.h = num(j, "h", where);
    if (j.contains("analytic_factor")) c.analytic_factor = num(j, "analytic_factor", where);
    return c;
}

json case_to_json(const ValidationCase& c) {
    json j{{"id", c.id}, {"fixture", c.fixture}, {"which", to_string(c.which)}, {"theta", c.theta}};
    if (std::isfinite(c.lo)) j["lo"] = c.lo;
    if (std::isfinite(c.hi)) j["hi"] = c.hi;
    j["n"] = c.n;
    j["scheme"] = c.scheme;
    if (c.scheme == "euler") j["h"] = c.h;
    if (c.analytic_factor != 1.0) j["analytic_factor"] = c.analytic_factor;
    return j;
}

std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

ValidationConfig validation_config_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("validation config: expected an object");
    for (const auto& [k, v] : j.items())
        if (k != "seed" && k != "fixtures" && k != "cases")
            throw ConfigError("validation config: unknown field \"" + k + "\"");
    ValidationConfig c;
    if (j.contains("seed")) c.seed = unsigned_field(j, "seed", "validation config");
    if (j.contains("fixtures")) {
        if (!j.at("fixtures").is_object()) throw ConfigError("fixtures must be an object of models");
        for (const auto& [name, model] : j.at("fixtures").items()) {
            try {
                (void)model_from_json(model);
            } catch (const ConfigError& e) {
                throw ConfigError("fixture \"" + name + "\": " + e.what());
            }
            c.fixtures.emplace(name, model);
        }
    }
    if (j.contains("cases")) {
        if (!j.at("cases").is_array()) throw ConfigError("cases must be an array");
        std::set<std::string> ids;
        std::size_t i = 0;
        for (const auto& cj : j.at("cases")) {
            ValidationCase vc = case_from_json(cj, i++);
            if (!c.fixtures.count(vc.fixture)) throw ConfigError("case \"" + vc.id + "\": unknown fixture \"" + vc.fixture + "\"");
            if (!ids.insert(vc.id).second) throw ConfigError("duplicate case id \"" + vc.id + "\"");
            c.cases.push_back(std::move(vc));
        }
    }
    return c;
}

json validation_config_to_json(const ValidationConfig& c) {
    json fixtures = json::object();
    for (const auto& [name, model] : c.fixtures) fixtures[name] = model_to_json(model_from_json(model));
    json cases = json::array();
    for (const auto& vc : c.cases) cases.push_back(case_to_json(vc));
    return {{"seed", c.seed}, {"fixtures", fixtures}, {"cases", cases}};
}

ValidationReport run_validation(const ValidationConfig& config, std::optional<std::uint64_t> seed_override) {
    const std::uint64_t seed = seed_override.value_or(config.seed);
    ValidationConfig echo = config;
    echo.seed = seed;

    ValidationReport rep;
    rep.timestamp = utc_timestamp();
    rep.config = validation_config_to_json(echo);

    std::vector<ValidationCase> cases = config.cases;
    std::sort(cases.begin(), cases.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    rep.cases.resize(cases.size());

    // Group by everything that determines the simulated paths.
    using Key = std::tuple<std::string, std::string, double, std::size_t>;
    std::map<Key, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        const auto& c = cases[i];
        groups[{c.fixture, c.scheme, c.scheme == "euler" ? c.h : 0.0, c.n}].push_back(i);
    }

    for (const auto& [key, members] : groups) {
        const RefractedModel model = model_from_json(config.fixtures.at(std::get<0>(key)));
        const Scheme scheme = std::get<1>(key) == "euler" ? Scheme::euler(std::get<2>(key)) : Scheme::exact();
        std::vector<OccupationQuery> queries;
        std::vector<std::size_t> runnable;
        for (std::size_t i : members) {
            const auto& c = cases[i];
            CaseRecord& r = rep.cases[i];
            r.id = c.id;
            r.fixture = c.fixture;
            r.which = to_string(c.which);
            r.theta = c.theta;
            r.lo = c.lo;
            r.hi = c.hi;
            r.scheme = scheme.label();
            r.n = c.n;
            r.band = scheme.kind == SchemeKind::euler ? 2e-2 : 0.0;
            const OccupationQuery q{c.theta, c.lo, c.hi};
            try {
                r.analytic = c.analytic_factor * occupation_lt(model, q).value;
                (void)resolve_window(model, q);
                queries.push_back(q);
                runnable.push_back(i);
            } catch (const std::exception& e) {
                r.error = e.what();
            }
        }
        std::vector<MCEstimate> est;
        try {
            if (!queries.empty()) est = mc_laplace_batch(model, queries, std::get<3>(key), scheme, seed);
        } catch (const std::exception& e) {
            for (std::size_t i : runnable) rep.cases[i].error = e.what();
            runnable.clear();
        }
        for (std::size_t k = 0; k < runnable.size(); ++k) {
            CaseRecord& r = rep.cases[runnable[k]];
            const MCEstimate& e = est[k];
            r.mc_mean = e.mean;
            r.mc_stderr = e.std_error;
            r.bias_bound = e.bias_bound;
            r.horizon_hits = e.horizon_hits;
            const double diff = std::abs(r.analytic - r.mc_mean);
            if (e.std_error > 0.0) r.z_score = (r.analytic - r.mc_mean) / e.std_error;
            else if (diff == 0.0) r.z_score = 0.0;
            r.pass = diff <= std::max(3.0 * e.std_error, r.band) + r.bias_bound;
        }
    }
    for (const auto& r : rep.cases) (r.pass ? rep.passed : rep.failed) += 1;
    return rep;
}

json report_to_json(const ValidationReport& r) {
    json cases = json::array();
    for (const auto& c : r.cases) {
        json j{{"id", c.id}, {"fixture", c.fixture}, {"which", c.which}, {"theta", c.theta}};
        j["lo"] = std::isfinite(c.lo) ? json(c.lo) : json(nullptr);
        j["hi"] = std::isfinite(c.hi) ? json(c.hi) : json(nullptr);
        j["scheme"] = c.scheme;
        j["n"] = c.n;
        j["analytic"] = c.analytic;
        j["mc_mean"] = c.mc_mean;
        j["mc_stderr"] = c.mc_stderr;
        j["bias_bound"] = c.bias_bound;
        j["band"] = c.band;
        j["z_score"] = c.z_score ? json(*c.z_score) : json(nullptr);
        j["horizon_hits"] = c.horizon_hits;
        j["pass"] = c.pass;
        if (!c.error.empty()) j["error"] = c.error;
        cases.push_back(std::move(j));
    }
    return {{"tool_version", r.tool_version},
            {"timestamp", r.timestamp},
            {"config", r.config},
            {"cases", cases},
            {"summary", {{"total", r.cases.size()}, {"passed", r.passed}, {"failed", r.failed}}}};
}

}  // namespace refract
