#include "magsphere/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "magsphere/errors.hpp"

namespace magsphere {

namespace {

using nlohmann::json;

FieldSpec parse_field(const json& j) {
    if (!j.is_object()) throw ConfigError("field must be an object");
    if (j.contains("preset")) {
        if (!j["preset"].is_string()) throw ConfigError("field.preset must be a string");
        try {
            return FieldSpec::preset(j["preset"].get<std::string>());
        } catch (const std::exception& e) {
            throw ConfigError(std::string("bad field preset: ") + e.what());
        }
    }
    if (j.contains("monomials")) {
        const json& terms = j["monomials"];
        if (!terms.is_array() || terms.empty())
            throw ConfigError("field.monomials must be a nonempty array");
        std::vector<Monomial> ms;
        for (const json& t : terms) {
            if (!t.is_array() || t.size() != 4)
                throw ConfigError("each monomial must be [ex, ey, ez, coef]");
            for (int i = 0; i < 3; ++i)
                if (!t[i].is_number_integer() || t[i].get<int>() < 0)
                    throw ConfigError("monomial exponents must be nonnegative integers");
            if (!t[3].is_number()) throw ConfigError("monomial coefficient must be a number");
            ms.push_back(Monomial{t[0].get<int>(), t[1].get<int>(), t[2].get<int>(),
                                  t[3].get<double>()});
        }
        try {
            return FieldSpec(ms);
        } catch (const std::exception& e) {
            throw ConfigError(std::string("bad field: ") + e.what());
        }
    }
    throw ConfigError("field needs either \"preset\" or \"monomials\"");
}

std::vector<double> parse_epsilons(const json& j) {
    std::vector<double> eps;
    if (j.is_number()) {
        eps.push_back(j.get<double>());
    } else if (j.is_array() && !j.empty()) {
        for (const json& e : j) {
            if (!e.is_number()) throw ConfigError("epsilon entries must be numbers");
            eps.push_back(e.get<double>());
        }
    } else {
        throw ConfigError("epsilon must be a number or a nonempty array");
    }
    for (const double e : eps)
        if (!(e >= 0.0 && e <= 0.5) || !std::isfinite(e))
            throw ConfigError("epsilon entries must lie in [0, 0.5]");
    return eps;
}

}  // namespace

RunConfig parse_config(const std::string& text, const ConfigOverrides& overrides) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("configuration is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("configuration root must be an object");

    RunConfig cfg;
    if (!j.contains("field")) throw ConfigError("missing required key \"field\"");
    cfg.field = parse_field(j["field"]);

    if (!overrides.epsilons.empty()) {
        cfg.epsilons = overrides.epsilons;
        for (const double e : cfg.epsilons)
            if (!(e >= 0.0 && e <= 0.5) || !std::isfinite(e))
                throw ConfigError("epsilon entries must lie in [0, 0.5]");
    } else {
        if (!j.contains("epsilon")) throw ConfigError("missing required key \"epsilon\"");
        cfg.epsilons = parse_epsilons(j["epsilon"]);
    }

    if (overrides.loop_points) {
        cfg.loop_points = *overrides.loop_points;
    } else if (j.contains("loop_points")) {
        if (!j["loop_points"].is_number_integer())
            throw ConfigError("loop_points must be an integer");
        cfg.loop_points = j["loop_points"].get<int>();
    }
    if (cfg.loop_points < 32 || cfg.loop_points % 2 != 0)
        throw ConfigError("loop_points must be an even integer >= 32");

    if (j.contains("melnikov_quad")) {
        const json& q = j["melnikov_quad"];
        if (!q.is_array() || q.size() != 2 || !q[0].is_number_integer() ||
            !q[1].is_number_integer())
            throw ConfigError("melnikov_quad must be [radial, angular] integers");
        cfg.melnikov_quad.radial = q[0].get<int>();
        cfg.melnikov_quad.angular = q[1].get<int>();
        if (cfg.melnikov_quad.radial < 16 || cfg.melnikov_quad.angular < 32)
            throw ConfigError("melnikov_quad below the minimum of [16, 32]");
    }

    if (j.contains("tolerances")) {
        const json& t = j["tolerances"];
        if (!t.is_object()) throw ConfigError("tolerances must be an object");
        const auto pick = [&](const char* key, double& slot) {
            if (!t.contains(key)) return;
            if (!t[key].is_number() || !(t[key].get<double>() > 0.0))
                throw ConfigError(std::string("tolerances.") + key + " must be positive");
            slot = t[key].get<double>();
        };
        pick("corrector", cfg.tolerances.corrector);
        pick("solution", cfg.tolerances.solution);
        pick("shooting", cfg.tolerances.shooting);
    }

    if (j.contains("seeds")) {
        if (!j["seeds"].is_number_integer() || j["seeds"].get<int>() < 1)
            throw ConfigError("seeds must be a positive integer");
        cfg.seeds = j["seeds"].get<int>();
    }

    if (overrides.output_dir) {
        cfg.output_dir = *overrides.output_dir;
    } else if (j.contains("output_dir")) {
        if (!j["output_dir"].is_string()) throw ConfigError("output_dir must be a string");
        cfg.output_dir = j["output_dir"].get<std::string>();
    }
    if (cfg.output_dir.empty()) throw ConfigError("output_dir must not be empty");

    static const char* known[] = {"field",      "epsilon", "loop_points", "melnikov_quad",
                                  "tolerances", "seeds",   "output_dir"};
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok) throw ConfigError("unknown configuration key \"" + key + "\"");
    }
    return cfg;
}

RunConfig load_config(const std::string& path, const ConfigOverrides& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open configuration file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), overrides);
}

}  // namespace magsphere
