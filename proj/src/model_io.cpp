#include "refract/model_io.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "refract/errors.hpp"

namespace refract {

namespace {

void require_keys(const json& j, const std::string& where, std::initializer_list<const char*> required,
                  std::initializer_list<const char*> optional = {}) {
    if (!j.is_object()) throw ConfigError(where + ": expected a JSON object");
    std::set<std::string> known;
    for (const char* k : required) {
        if (!j.contains(k)) throw ConfigError(where + ": missing field \"" + k + "\"");
        known.insert(k);
    }
    for (const char* k : optional) known.insert(k);
    for (const auto& [k, v] : j.items()) {
        if (!known.count(k)) throw ConfigError(where + ": unknown field \"" + k + "\"");
    }
}

double number(const json& j, const char* key, const std::string& where) {
    const json& v = j.at(key);
    if (!v.is_number()) throw ConfigError(where + ": field \"" + key + "\" must be a number");
    return v.get<double>();
}

std::vector<double> numbers(const json& j, const char* key, const std::string& where) {
    const json& v = j.at(key);
    if (!v.is_array()) throw ConfigError(where + ": field \"" + key + "\" must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
        if (!e.is_number()) throw ConfigError(where + ": field \"" + key + "\" must be an array of numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

MagnitudeLaw law_from_json(const json& j) {
    const std::string where = "jumps.law";
    if (!j.is_object() || !j.contains("type") || !j.at("type").is_string())
        throw ConfigError(where + ": needs a string field \"type\"");
    const std::string type = j.at("type").get<std::string>();
    if (type == "exponential") {
        require_keys(j, where, {"type", "mean"});
        return ExponentialLaw{number(j, "mean", where)};
    }
    if (type == "mixed-exponential") {
        require_keys(j, where, {"type", "weights", "means"});
        return MixedExponentialLaw{numbers(j, "weights", where), numbers(j, "means", where)};
    }
    if (type == "erlang") {
        require_keys(j, where, {"type", "shape", "mean"});
        const json& k = j.at("shape");
        if (!k.is_number_integer()) throw ConfigError(where + ": erlang shape must be an integer");
        return ErlangLaw{k.get<int>(), number(j, "mean", where)};
    }
    if (type == "point-mass") {
        require_keys(j, where, {"type", "size"});
        return PointMassLaw{number(j, "size", where)};
    }
    throw ConfigError(where + ": unknown law type \"" + type + "\"");
}

json law_to_json(const MagnitudeLaw& law) {
    return std::visit(
        [](const auto& l) -> json {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, ExponentialLaw>) return {{"type", "exponential"}, {"mean", l.mean}};
            else if constexpr (std::is_same_v<T, MixedExponentialLaw>)
                return {{"type", "mixed-exponential"}, {"weights", l.weights}, {"means", l.means}};
            else if constexpr (std::is_same_v<T, ErlangLaw>)
                return {{"type", "erlang"}, {"shape", l.shape}, {"mean", l.mean}};
            else return {{"type", "point-mass"}, {"size", l.size}};
        },
        law);
}

}  // namespace

json parse_json_text(const std::string& text, const std::string& source) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1, col = 1;
        const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        for (std::size_t i = 0; i < end; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        std::string msg = e.what();
        const auto p = msg.find("syntax error");
        if (p != std::string::npos) msg = msg.substr(p);
        throw ConfigError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": malformed JSON: " + msg);
    }
}

json read_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_json_text(ss.str(), path);
}

JumpSpec jumps_from_json(const json& j) {
    const std::string where = "jumps";
    if (!j.is_object() || !j.contains("type") || !j.at("type").is_string())
        throw ConfigError(where + ": needs a string field \"type\"");
    const std::string type = j.at("type").get<std::string>();
    if (type == "none") {
        require_keys(j, where, {"type"});
        return JumpSpec::none();
    }
    if (type == "compound-poisson") {
        require_keys(j, where, {"type", "rate", "law"});
        return JumpSpec(number(j, "rate", where), JumpLaw(law_from_json(j.at("law"))));
    }
    throw ConfigError(where + ": unknown jump type \"" + type + "\"");
}

json jumps_to_json(const JumpSpec& jumps) {
    if (!jumps.has_jumps()) return {{"type", "none"}};
    return {{"type", "compound-poisson"}, {"rate", jumps.rate()}, {"law", law_to_json(jumps.law().law())}};
}

LevyModel levy_from_json(const json& j) {
    require_keys(j, "model", {"gamma", "sigma2", "jumps"}, {"delta", "b"});
    return {number(j, "gamma", "model"), number(j, "sigma2", "model"), jumps_from_json(j.at("jumps"))};
}

RefractedModel model_from_json(const json& j) {
    LevyModel x = levy_from_json(j);
    const double delta = j.contains("delta") ? number(j, "delta", "model") : 0.0;
    const double b = j.contains("b") ? number(j, "b", "model") : 0.0;
    return {std::move(x), delta, b};
}

json model_to_json(const RefractedModel& m) {
    return {{"gamma", m.x().gamma()},
            {"sigma2", m.x().sigma2()},
            {"jumps", jumps_to_json(m.x().jumps())},
            {"delta", m.delta()},
            {"b", m.b()}};
}

RefractedModel read_model_file(const std::string& path) { return model_from_json(read_json_file(path)); }

double parse_level(const std::string& s) {
    if (s == "inf" || s == "+inf" || s == "Inf" || s == "infinity") return std::numeric_limits<double>::infinity();
    if (s == "-inf" || s == "-Inf" || s == "-infinity") return -std::numeric_limits<double>::infinity();
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE) throw ConfigError("not a number: \"" + s + "\"");
    return v;
}

}  // namespace refract
