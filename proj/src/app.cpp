#include "magsphere/app.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>

#include <json.hpp>

#include "magsphere/errors.hpp"
#include "magsphere/functionals.hpp"
#include "magsphere/loop.hpp"
#include "magsphere/melnikov.hpp"
#include "magsphere/reduction.hpp"
#include "magsphere/shooting.hpp"

namespace magsphere {

namespace {

using json = nlohmann::ordered_json;

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// Shortest round-trip representation; used in file names.
std::string fmt_short(double x) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

std::filesystem::path prepare_output_dir(const RunConfig& cfg) {
    std::filesystem::path dir(cfg.output_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + cfg.output_dir);
    return dir;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw ConfigError("failed writing " + path.string());
}

void write_json(const std::filesystem::path& path, const json& doc) {
    write_text(path, doc.dump(2) + "\n");
}

CorrectorOptions corrector_options(const RunConfig& cfg) {
    CorrectorOptions opts;
    opts.tol = cfg.tolerances.corrector;
    opts.solution_tol = cfg.tolerances.solution;
    opts.n = cfg.loop_points;
    return opts;
}

void warn_on_nonzero_mean(const FieldSpec& k) {
    const double mean = sphere_mean(k);
    if (std::abs(mean) > 1e-6 * std::max(1.0, k.sup_estimate()))
        std::cerr << "warning: field has nonzero surface mean " << fmt17(mean)
                  << "; a physical magnetic intensity integrates to zero\n";
}

struct LoopDiagnostics {
    double speed_cv;
    double curvature_error;
    bool embedded;
};

LoopDiagnostics diagnose_loop(const Loop& u, const FieldSpec& k, double eps) {
    const auto du = derivative(u, 1);
    double mean = 0.0;
    for (const auto& d : du) mean += d.norm();
    mean /= u.size();
    double var = 0.0;
    for (const auto& d : du) var += (d.norm() - mean) * (d.norm() - mean);
    const double cv = std::sqrt(var / u.size()) / mean;

    const GridFun kappa = geodesic_curvature(u);
    double cerr = 0.0;
    for (int i = 0; i < u.size(); ++i)
        cerr = std::max(cerr, std::abs(kappa[i] - eps * k.eval(u[i])));

    return LoopDiagnostics{cv, cerr, is_embedded(u)};
}

json energy_json(const EnergyBreakdown& b) {
    return json{{"length", b.length}, {"area", b.area}, {"epsilon", b.epsilon},
                {"energy", b.energy}};
}

// Pole far from the loop: antipode of the spherical centroid, falling back
// to the winding axis for balanced curves such as great circles.
UnitVec3 far_pole(const Loop& u) {
    Vec3 centroid = Vec3::Zero();
    for (int i = 0; i < u.size(); ++i) centroid += u[i];
    if (centroid.norm() >= 1e-6 * u.size()) return UnitVec3(Vec3(-centroid.normalized()));
    Vec3 axis = Vec3::Zero();
    for (int i = 0; i < u.size(); ++i) axis += u[i].cross(u[(i + 1) % u.size()]);
    if (axis.norm() < 1e-8)
        throw DegenerateCurveError("loop has no usable centroid or winding axis");
    return UnitVec3(Vec3(-axis.normalized()));
}

}  // namespace

int cmd_melnikov_scan(const RunConfig& cfg) {
    const auto dir = prepare_output_dir(cfg);
    warn_on_nonzero_mean(cfg.field);
    const std::vector<UnitVec3> grid = fibonacci_sphere(cfg.seeds);

    std::string csv = "z_x,z_y,z_z,F\n";
    for (const UnitVec3& z : grid) {
        const double f = melnikov_value(z, cfg.field, cfg.melnikov_quad);
        csv += fmt17(z.x()) + "," + fmt17(z.y()) + "," + fmt17(z.z()) + "," + fmt17(f) + "\n";
    }
    write_text(dir / "melnikov_grid.csv", csv);

    const MelnikovReport rep = find_stable_critical_points(
        cfg.field, [](const Vec3&) { return true; }, grid, cfg.melnikov_quad);
    json cp;
    cp["degenerate_landscape"] = rep.degenerate_landscape;
    cp["sphere_mean"] = sphere_mean(cfg.field);
    cp["critical_points"] = json::array();
    for (const CriticalPoint& p : rep.critical_points)
        cp["critical_points"].push_back(json{{"z", vec_json(p.z)},
                                             {"value", p.value},
                                             {"kind", p.kind},
                                             {"hessian_eigs", {p.hessian_eigs(0), p.hessian_eigs(1)}},
                                             {"grad_norm", p.grad_norm}});
    write_json(dir / "critical_points.json", cp);

    const DistinctnessReport drep = distinctness_check(cfg.field, 500, cfg.melnikov_quad);
    json dj;
    dj["condition_holds"] = drep.condition_holds;
    dj["scale"] = drep.scale;
    dj["vanishing_circles"] = json::array();
    for (const auto& c : drep.candidates)
        dj["vanishing_circles"].push_back(json{{"axis", vec_json(c.axis)},
                                               {"value_plus", c.value_plus},
                                               {"value_minus", c.value_minus},
                                               {"circle_sup", c.circle_sup}});
    write_json(dir / "distinctness.json", dj);
    return 0;
}

int cmd_solve(const RunConfig& cfg) {
    const auto dir = prepare_output_dir(cfg);
    warn_on_nonzero_mean(cfg.field);
    const CorrectorOptions opts = corrector_options(cfg);
    const std::vector<UnitVec3> seeds = fibonacci_sphere(cfg.seeds);

    int exit_code = 0;
    json runs = json::array();
    for (const double eps : cfg.epsilons) {
        json run;
        run["epsilon"] = eps;
        const SearchReport rep = critical_search(eps, cfg.field, seeds, opts);
        run["degenerate_landscape"] = rep.degenerate_landscape;
        run["failed_seeds"] = rep.failed_seeds;

        std::vector<ReductionState> states;
        std::vector<std::string> labels;
        if (rep.degenerate_landscape) {
            run["note"] =
                "reduced energy is constant over the grid; critical points are not "
                "isolated and every corrected loop solves the equation (a family of "
                "constant-geodesic-curvature circles); one representative emitted";
            states.push_back(solve_corrector(eps, Rotation3::identity(), cfg.field, opts));
            labels.push_back("degenerate");
        } else {
            for (const SearchSolution& s : rep.solutions) {
                states.push_back(s.state);
                labels.push_back(s.classification);
            }
        }

        // Listed solutions must pass both gates; anything else is reported
        // aside and not written as a solution file.
        json dropped = json::array();
        std::vector<int> keep;
        for (int i = 0; i < int(states.size()); ++i) {
            const bool critical =
                criticality_check(states[i], cfg.tolerances.solution).is_solution;
            const bool embedded = is_embedded(states[i].corrected_loop);
            if (critical && embedded) {
                keep.push_back(i);
            } else {
                dropped.push_back(json{{"center", vec_json(states[i].center.vec())},
                                       {"critical", critical},
                                       {"embedded", embedded}});
            }
        }

        json sols = json::array();
        for (int idx = 0; idx < int(keep.size()); ++idx) {
            const ReductionState& st = states[keep[idx]];
            const Loop& u = st.corrected_loop;
            const std::string name =
                "solve_eps" + fmt_short(eps) + "_sol" + std::to_string(idx) + ".csv";
            loop_to_csv(u, (dir / name).string());

            const LoopDiagnostics diag = diagnose_loop(u, cfg.field, eps);
            const EnergyBreakdown breakdown =
                energy(UnitVec3(Vec3(-st.center.vec())), u, cfg.field, eps);

            bool distinct = false;
            bool shares_image = false;
            for (int jdx = 0; jdx < int(keep.size()); ++jdx) {
                if (jdx == idx) continue;
                const Loop& v = states[keep[jdx]].corrected_loop;
                if (phase_align_distance(u, v).distance > 1e-6) distinct = true;
                if (phase_align_distance(u, reversed(v)).distance <= 1e-6) shares_image = true;
            }

            json sj;
            sj["file"] = name;
            sj["center"] = vec_json(st.center.vec());
            sj["classification"] = labels[keep[idx]];
            sj["energy"] = energy_json(breakdown);
            sj["residual"] = st.residual_sup;
            sj["constraint"] = st.constraint_sup;
            sj["multipliers"] = vec_json(st.multipliers);
            sj["multiplier_norm"] = st.multipliers.norm();
            sj["newton_iters"] = st.newton_iters;
            sj["curvature_error"] = diag.curvature_error;
            sj["speed_cv"] = diag.speed_cv;
            sj["embedded"] = diag.embedded;
            sj["distinct_pair"] = distinct;
            sj["same_image_opposite_orientation"] = shares_image;
            try {
                const CrossValidation cv = cross_validate(st, cfg.field,
                                                          ShootingOptions{cfg.tolerances.shooting});
                sj["oracle_distance"] = cv.aligned_distance;
                sj["oracle_period_rel_error"] = cv.period_rel_error;
            } catch (const ShootingFailureError& e) {
                sj["oracle_distance"] = nullptr;
                sj["oracle_error"] = e.what();
            }
            sols.push_back(std::move(sj));
        }

        // Pairs closer than the distinctness threshold stay listed but are
        // called out rather than silently merged.
        json possibly_identical = json::array();
        for (int a = 0; a < int(keep.size()); ++a)
            for (int b = a + 1; b < int(keep.size()); ++b)
                if (phase_align_distance(states[keep[a]].corrected_loop,
                                         states[keep[b]].corrected_loop)
                        .distance <= 1e-6)
                    possibly_identical.push_back(json::array({a, b}));

        run["solutions"] = std::move(sols);
        if (!dropped.empty()) run["dropped"] = std::move(dropped);
        if (!possibly_identical.empty()) run["possibly_identical"] = std::move(possibly_identical);
        runs.push_back(std::move(run));

        if (keep.empty() && !rep.failed_seeds.empty() && !rep.degenerate_landscape) exit_code = 3;
    }

    json report;
    report["field_terms"] = json::array();
    for (const Monomial& m : cfg.field.terms())
        report["field_terms"].push_back(json::array({m.ex, m.ey, m.ez, m.coef}));
    report["loop_points"] = cfg.loop_points;
    report["seeds"] = cfg.seeds;
    report["runs"] = std::move(runs);
    write_json(dir / "solve_report.json", report);
    return exit_code;
}

int cmd_shoot(const RunConfig& cfg, const std::string& loop_path) {
    const auto dir = prepare_output_dir(cfg);
    const Loop guess = loop_from_csv(loop_path);
    const double eps = cfg.epsilons.front();
    const bool static_limit = eps == 0.0;
    const double c = static_limit ? 1.0 : 1.0 / eps;
    const FieldSpec field = static_limit ? FieldSpec() : cfg.field;

    ShootingOptions opts;
    opts.tol = cfg.tolerances.shooting;
    const OrbitResult orbit = find_periodic(field, c, guess, opts);
    const double predicted =
        static_limit ? 2.0 * std::numbers::pi : 2.0 * std::numbers::pi * length_functional(guess) * eps;

    loop_to_csv(orbit.samples, (dir / "shoot_orbit.csv").string());
    json summary;
    summary["speed"] = c;
    summary["period"] = orbit.period;
    summary["predicted_period"] = predicted;
    summary["period_rel_error"] = std::abs(orbit.period - predicted) / predicted;
    summary["closure_error"] = orbit.closure_error;
    summary["speed_drift"] = orbit.speed_drift;
    summary["aligned_distance"] = phase_align_distance(orbit.samples, guess).distance;
    write_json(dir / "shoot_summary.json", summary);
    return 0;
}

int cmd_verify(const RunConfig& cfg, const std::string& loop_path) {
    const Loop u = loop_from_csv(loop_path);
    const double eps = cfg.epsilons.front();
    const FieldSpec& k = cfg.field;

    // Raw Euler-Lagrange residual, no multiplier reduction.
    const std::vector<Vec3> j = Jeps(eps, u, k);
    double residual = 0.0;
    for (const Vec3& v : j) residual = std::max(residual, v.norm());

    const LoopDiagnostics diag = diagnose_loop(u, k, eps);
    const EnergyBreakdown breakdown = energy(far_pole(u), u, k, eps);

    std::cout << "residual_sup= " << fmt17(residual) << "\n"
              << "speed_cv= " << fmt17(diag.speed_cv) << "\n"
              << "curvature_error_max= " << fmt17(diag.curvature_error) << "\n"
              << "embedded= " << (diag.embedded ? "true" : "false") << "\n"
              << "length= " << fmt17(breakdown.length) << "\n"
              << "area= " << fmt17(breakdown.area) << "\n"
              << "epsilon= " << fmt17(breakdown.epsilon) << "\n"
              << "energy= " << fmt17(breakdown.energy) << "\n";
    return 0;
}

int cmd_landscape(const RunConfig& cfg) {
    const auto dir = prepare_output_dir(cfg);
    const double eps = cfg.epsilons.front();
    const CorrectorOptions opts = corrector_options(cfg);
    const std::vector<UnitVec3> grid = fibonacci_sphere(cfg.seeds);

    std::string csv = "z_x,z_y,z_z,E,E0\n";
    for (const UnitVec3& z : grid) {
        const ReducedEnergySample s = reduced_energy(eps, z, cfg.field, opts);
        csv += fmt17(z.x()) + "," + fmt17(z.y()) + "," + fmt17(z.z()) + "," + fmt17(s.energy) +
               "," + fmt17(s.leading) + "\n";
    }
    write_text(dir / "landscape.csv", csv);
    return 0;
}

}  // namespace magsphere
