#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "magsphere/app.hpp"
#include "magsphere/config.hpp"
#include "magsphere/errors.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    magsphere::ConfigOverrides overrides;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("config", args.config_path, "run configuration (JSON)")->required();
    cmd->add_option("--epsilon", args.overrides.epsilons,
                    "override the epsilon list from the configuration");
    cmd->add_option_function<int>(
        "--loop-points", [&args](const int& v) { args.overrides.loop_points = v; },
        "override loop_points");
    cmd->add_option_function<std::string>(
        "--out", [&args](const std::string& v) { args.overrides.output_dir = v; },
        "override output_dir");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"closed magnetic geodesics on the unit sphere: reduction solver, "
                 "hemisphere-integral scans and an independent shooting check"};
    app.require_subcommand(1);

    CommonArgs scan_args, solve_args, shoot_args, verify_args, landscape_args;
    std::string shoot_loop, verify_loop;

    CLI::App* scan = app.add_subcommand(
        "melnikov-scan", "tabulate the hemisphere integral and its critical points");
    add_common(scan, scan_args);
    CLI::App* solve =
        app.add_subcommand("solve", "find closed magnetic geodesics for each epsilon");
    add_common(solve, solve_args);
    CLI::App* shoot =
        app.add_subcommand("shoot", "close an orbit of the physical flow from a loop file");
    add_common(shoot, shoot_args);
    shoot->add_option("loop", shoot_loop, "loop CSV used as the initial guess")->required();
    CLI::App* verify = app.add_subcommand("verify", "print diagnostics for a loop file");
    add_common(verify, verify_args);
    verify->add_option("loop", verify_loop, "loop CSV to check")->required();
    CLI::App* landscape =
        app.add_subcommand("landscape", "tabulate the reduced energy over a sphere grid");
    add_common(landscape, landscape_args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << e.what() << "\n";
        return 2;
    }

    try {
        using namespace magsphere;
        if (scan->parsed())
            return cmd_melnikov_scan(load_config(scan_args.config_path, scan_args.overrides));
        if (solve->parsed())
            return cmd_solve(load_config(solve_args.config_path, solve_args.overrides));
        if (shoot->parsed())
            return cmd_shoot(load_config(shoot_args.config_path, shoot_args.overrides),
                             shoot_loop);
        if (verify->parsed())
            return cmd_verify(load_config(verify_args.config_path, verify_args.overrides),
                              verify_loop);
        if (landscape->parsed())
            return cmd_landscape(load_config(landscape_args.config_path, landscape_args.overrides));
    } catch (const magsphere::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const magsphere::CorrectorDivergenceError& e) {
        std::cerr << "solver divergence: " << e.what() << "\n";
        return 3;
    } catch (const magsphere::ShootingFailureError& e) {
        std::cerr << "shooting failure: " << e.what() << "\n";
        return 3;
    } catch (const std::domain_error& e) {
        std::cerr << "invalid curve: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
