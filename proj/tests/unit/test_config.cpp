#include <doctest.h>

#include "magsphere/config.hpp"
#include "magsphere/errors.hpp"

using namespace magsphere;

TEST_CASE("minimal configuration and defaults") {
    const RunConfig cfg =
        parse_config(R"({"field": {"preset": "linear_z"}, "epsilon": 0.05})");
    REQUIRE(cfg.epsilons.size() == 1);
    CHECK(cfg.epsilons[0] == 0.05);
    CHECK(cfg.field.eval(UnitVec3(0.0, 0.0, 1.0)) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(cfg.loop_points == 256);
    CHECK(cfg.melnikov_quad.radial == 24);
    CHECK(cfg.melnikov_quad.angular == 64);
    CHECK(cfg.tolerances.corrector == 1e-10);
    CHECK(cfg.tolerances.solution == 1e-8);
    CHECK(cfg.tolerances.shooting == 1e-8);
    CHECK(cfg.seeds == 32);
    CHECK(cfg.output_dir == "out");
}

TEST_CASE("full configuration round trip") {
    const RunConfig cfg = parse_config(R"({
        "field": {"monomials": [[0, 0, 1, 2.0], [2, 0, 0, -0.5]]},
        "epsilon": [0.1, 0.05, 0.025],
        "loop_points": 128,
        "melnikov_quad": [32, 96],
        "tolerances": {"corrector": 1e-11, "shooting": 1e-9},
        "seeds": 12,
        "output_dir": "artifacts"
    })");
    CHECK(cfg.epsilons == std::vector<double>{0.1, 0.05, 0.025});
    CHECK(cfg.loop_points == 128);
    CHECK(cfg.melnikov_quad.radial == 32);
    CHECK(cfg.melnikov_quad.angular == 96);
    CHECK(cfg.tolerances.corrector == 1e-11);
    CHECK(cfg.tolerances.solution == 1e-8);  // untouched default
    CHECK(cfg.tolerances.shooting == 1e-9);
    CHECK(cfg.seeds == 12);
    CHECK(cfg.output_dir == "artifacts");
    const UnitVec3 p(0.0, 0.0, 1.0);
    CHECK(cfg.field.eval(p) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("overrides win over the file") {
    ConfigOverrides ov;
    ov.epsilons = {0.2};
    ov.loop_points = 64;
    ov.output_dir = "elsewhere";
    const RunConfig cfg = parse_config(
        R"({"field": {"preset": "constant_one"}, "epsilon": [0.1, 0.05],
            "loop_points": 256, "output_dir": "out"})",
        ov);
    CHECK(cfg.epsilons == std::vector<double>{0.2});
    CHECK(cfg.loop_points == 64);
    CHECK(cfg.output_dir == "elsewhere");
}

TEST_CASE("epsilon zero is admitted for the static limit") {
    const RunConfig cfg = parse_config(R"({"field": {"preset": "linear_z"}, "epsilon": 0.0})");
    CHECK(cfg.epsilons[0] == 0.0);
}

TEST_CASE("rejected configurations") {
    const auto bad = [](const std::string& text) {
        CHECK_THROWS_AS(parse_config(text), ConfigError);
    };
    bad("not json at all {{{");
    bad(R"([1, 2, 3])");
    bad(R"({"epsilon": 0.05})");
    bad(R"({"field": {"preset": "linear_z"}})");
    bad(R"({"field": {"preset": "no_such_preset"}, "epsilon": 0.05})");
    bad(R"({"field": {}, "epsilon": 0.05})");
    bad(R"({"field": {"monomials": []}, "epsilon": 0.05})");
    bad(R"({"field": {"monomials": [[0, 0, 1]]}, "epsilon": 0.05})");
    bad(R"({"field": {"monomials": [[0, 0, -1, 1.0]]}, "epsilon": 0.05})");
    bad(R"({"field": {"preset": "linear_z"}, "epsilon": 0.6})");
    bad(R"({"field": {"preset": "linear_z"}, "epsilon": -0.1})");
    bad(R"({"field": {"preset": "linear_z"}, "epsilon": []})");
    bad(R"({"field": {"preset": "linear_z"}, "epsilon": 0.05, "loop_points": 33})");
    bad(R"({"field": {"preset": "linear_z"}, "epsilon": 0.05, "loop_points": 16})");
    bad(R"({"field": {"preset": "linear_z"}, "epsilon": 0.05, "melnikov_quad": [8, 64]})");
    bad(R"({"field": {"preset": "linear_z"}, "epsilon": 0.05, "melnikov_quad": [24]})");
    bad(R"({"field": {"preset": "linear_z"}, "epsilon": 0.05,
            "tolerances": {"corrector": 0.0}})");
    bad(R"({"field": {"preset": "linear_z"}, "epsilon": 0.05, "seeds": 0})");
    bad(R"({"field": {"preset": "linear_z"}, "epsilon": 0.05, "output_dir": ""})");
    bad(R"({"field": {"preset": "linear_z"}, "epsilon": 0.05, "typo_key": 1})");
}

TEST_CASE("override epsilons are validated too") {
    ConfigOverrides ov;
    ov.epsilons = {0.7};
    CHECK_THROWS_AS(
        parse_config(R"({"field": {"preset": "linear_z"}, "epsilon": 0.05})", ov),
        ConfigError);
}

TEST_CASE("missing configuration file") {
    CHECK_THROWS_AS(load_config("/nonexistent/path/config.json"), ConfigError);
}
