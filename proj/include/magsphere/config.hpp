#pragma once

#include <optional>
#include <string>
#include <vector>

#include "magsphere/field.hpp"
#include "magsphere/melnikov.hpp"

namespace magsphere {

struct ToleranceSet {
    double corrector = 1e-10;
    double solution = 1e-8;
    double shooting = 1e-8;
};

// One run configuration, parsed from a JSON document. Schema:
//   field:        {"preset": "linear_z"} or
//                 {"monomials": [[ex, ey, ez, coef], ...]}
//   epsilon:      number or array of numbers, each in [0, 0.5]
//   loop_points:  even integer >= 32 (default 256)
//   melnikov_quad: [radial, angular] (default [24, 64])
//   tolerances:   {"corrector":..., "solution":..., "shooting":...}
//   seeds:        integer >= 1 (default 32)
//   output_dir:   path (default "out")
// Only "field" and "epsilon" are mandatory.
struct RunConfig {
    FieldSpec field;
    std::vector<double> epsilons;
    int loop_points = 256;
    QuadSpec melnikov_quad;
    ToleranceSet tolerances;
    int seeds = 32;
    std::string output_dir = "out";
};

// Command-line overrides; set fields win over the file.
struct ConfigOverrides {
    std::vector<double> epsilons;
    std::optional<int> loop_points;
    std::optional<std::string> output_dir;
};

RunConfig load_config(const std::string& path, const ConfigOverrides& overrides = {});
RunConfig parse_config(const std::string& text, const ConfigOverrides& overrides = {});

}  // namespace magsphere
