#include "magsphere/reduction.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>

#include "magsphere/errors.hpp"
#include "magsphere/melnikov.hpp"

namespace magsphere {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kFlipLatitude = -0.9;

Mat3 half_turn_x() {
    Mat3 r = Mat3::Identity();
    r(1, 1) = -1.0;
    r(2, 2) = -1.0;
    return r;
}

void validate_opts(const CorrectorOptions& opts) {
    if (opts.n < 32 || opts.n % 2 != 0)
        throw std::invalid_argument("corrector needs an even sample count >= 32");
    if (opts.tol <= 0.0 || opts.max_iters < 1 || opts.stage_step <= 0.0)
        throw std::invalid_argument("corrector options out of range");
}

struct StageResult {
    std::vector<Vec3> u;
    Vec3 zeta = Vec3::Zero();
    double residual_sup = 0.0;
    double constraint_sup = 0.0;
    int iters = 0;
};

Vec3 kernel_moments(const KernelBasis& basis, const std::vector<Vec3>& f) {
    const int n = int(f.size());
    Vec3 b = Vec3::Zero();
    for (int j = 0; j < 3; ++j) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += f[i].dot(basis.fields[j].values[i]);
        b(j) = s / n;
    }
    return b;
}

// One fixed-epsilon quasi-Newton run from the given start samples. The
// frozen great-circle inverse keeps every linear solve diagonal in Fourier
// space; contraction is linear in epsilon.
StageResult run_stage(double eps, const Rotation3& r, const FieldSpec& k,
                      const CorrectorOptions& opts, std::vector<Vec3> u) {
    const int n = opts.n;
    const KernelBasis basis = kernel_basis(r, n);
    const Loop& omega = basis.fields[0].base;
    const Eigen::FullPivLU<Mat3> gram_lu(basis.gram);

    StageResult res;
    std::array<std::vector<Vec3>, 3> mh;
    for (auto& m : mh) m.resize(n);
    for (int iter = 0;; ++iter) {
        const Loop lu(u);
        // Stationarity is measured in the tangent planes at u: the pointwise
        // unit-norm constraint absorbs every normal component, and the
        // multiplier fields are the kernel fields projected there. The raw
        // kernel fields are tangent at omega, not at u, and their normal
        // leftover would floor the residual at |zeta| * |u - omega|.
        std::vector<Vec3> j = Jeps(eps, lu, k);
        for (int i = 0; i < n; ++i) j[i] -= j[i].dot(u[i]) * u[i];
        for (int h = 0; h < 3; ++h)
            for (int i = 0; i < n; ++i) {
                const Vec3& w = basis.fields[h].values[i];
                mh[h][i] = w - w.dot(u[i]) * u[i];
            }
        Mat3 mg;
        Vec3 mb;
        for (int h = 0; h < 3; ++h) {
            for (int g = h; g < 3; ++g) {
                double s = 0.0;
                for (int i = 0; i < n; ++i) s += mh[h][i].dot(mh[g][i]);
                mg(h, g) = mg(g, h) = s / n;
            }
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += j[i].dot(mh[h][i]);
            mb(h) = s / n;
        }
        res.zeta = mg.fullPivLu().solve(mb);
        std::vector<Vec3> resid(n);
        res.residual_sup = 0.0;
        for (int i = 0; i < n; ++i) {
            resid[i] = j[i];
            for (int h = 0; h < 3; ++h) resid[i] -= res.zeta(h) * mh[h][i];
            res.residual_sup = std::max(res.residual_sup, resid[i].norm());
        }
        res.constraint_sup = kernel_moments(basis, u).cwiseAbs().maxCoeff();
        res.iters = iter;
        if (!std::isfinite(res.residual_sup) || res.residual_sup > 1e3)
            throw CorrectorDivergenceError("corrector residual blew up", res.residual_sup);
        if (std::max(res.residual_sup, res.constraint_sup) <= opts.tol) break;
        if (iter >= opts.max_iters)
            throw CorrectorDivergenceError("corrector did not reach tolerance",
                                           std::max(res.residual_sup, res.constraint_sup));

        std::vector<Vec3> rt(n);
        for (int i = 0; i < n; ++i) rt[i] = resid[i] - resid[i].dot(omega[i]) * omega[i];
        const TangentLoopField phi = solve_linearized(r, TangentLoopField(omega, std::move(rt)));
        for (int i = 0; i < n; ++i) u[i] = (u[i] - phi.values[i]).normalized();
        // Re-impose the kernel moments; normalization reintroduces a
        // second-order leak, hence the second round.
        for (int round = 0; round < 2; ++round) {
            const Vec3 c = gram_lu.solve(kernel_moments(basis, u));
            for (int i = 0; i < n; ++i) {
                Vec3 v = u[i];
                for (int h = 0; h < 3; ++h) v -= c(h) * basis.fields[h].values[i];
                u[i] = v.normalized();
            }
        }
    }
    res.u = std::move(u);
    return res;
}

StageResult cold_staged_solve(double eps, const Rotation3& r, const FieldSpec& k,
                              const CorrectorOptions& opts) {
    const int stages = std::max(1, int(std::ceil(std::abs(eps) / opts.stage_step - 1e-12)));
    StageResult res;
    res.u = great_circle(r, opts.n).samples();
    int total_iters = 0;
    for (int s = 1; s <= stages; ++s) {
        res = run_stage(eps * s / stages, r, k, opts, std::move(res.u));
        total_iters += res.iters;
    }
    res.iters = total_iters;
    return res;
}

ReductionState assemble_state(double eps, const Rotation3& r, const FieldSpec& k,
                              const CorrectorOptions& opts, StageResult res) {
    const KernelBasis basis = kernel_basis(r, opts.n);
    Mat3 gram_eps;
    for (int h = 0; h < 3; ++h)
        for (int j = 0; j < 3; ++j) {
            double s = 0.0;
            for (int i = 0; i < opts.n; ++i)
                s += (r.mat().col(h).cross(res.u[i])).dot(basis.fields[j].values[i]);
            gram_eps(h, j) = s / opts.n;
        }
    return ReductionState{eps,
                          r,
                          UnitVec3(Vec3(r.mat().col(2))),
                          Loop(std::move(res.u)),
                          res.zeta,
                          res.residual_sup,
                          res.constraint_sup,
                          gram_eps,
                          res.iters};
}

double state_energy(const ReductionState& st, const FieldSpec& k) {
    const UnitVec3 pole(Vec3(-st.center.vec()));
    return energy(pole, st.corrected_loop, k, st.epsilon).energy;
}

}  // namespace

ReductionState solve_corrector(double eps, const Rotation3& r, const FieldSpec& k,
                               const CorrectorOptions& opts) {
    validate_opts(opts);
    if (std::abs(eps) > opts.eps_max)
        throw std::invalid_argument("epsilon beyond the configured maximum");
    return assemble_state(eps, r, k, opts, cold_staged_solve(eps, r, k, opts));
}

ReducedEnergySample reduced_energy(double eps, const UnitVec3& z, const FieldSpec& k,
                                   const CorrectorOptions& opts) {
    const Rotation3 r = north_transport(z);
    const ReductionState st = solve_corrector(eps, r, k, opts);
    ReducedEnergySample s{z.vec(), state_energy(st, k),
                          1.0 - eps / kTwoPi * melnikov_value(z, k), st.multipliers.norm()};
    return s;
}

CriticalityResult criticality_check(const ReductionState& state, double solution_tol) {
    const double norm = state.multipliers.norm();
    return CriticalityResult{norm <= solution_tol, norm};
}

Vec3 so3_energy_gradient(const ReductionState& state, const FieldSpec& k) {
    const Loop& u = state.corrected_loop;
    const auto du = derivative(u, 1);
    const Mat3& rm = state.rotation.mat();
    Vec3 g = Vec3::Zero();
    for (int i = 0; i < u.size(); ++i) {
        const Vec3 cr = u[i].cross(du[i]);
        const double kv = k.eval(u[i]);
        for (int h = 0; h < 3; ++h) g(h) += kv * cr.dot(rm.col(h).cross(u[i]));
    }
    return state.epsilon / u.size() * g;
}

Vec2 chart_coords_of_so3_gradient(const UnitVec3& z, const Vec3& g) {
    const Mat3 frame = north_transport(z).mat();
    const double h = 1e-6;
    Vec2 out;
    for (int i = 0; i < 2; ++i) {
        const Vec3 d = frame.col(i);
        const Mat3 np = north_transport(UnitVec3(Vec3(z.vec() + h * d))).mat();
        const Mat3 nm = north_transport(UnitVec3(Vec3(z.vec() - h * d))).mat();
        const Mat3 body = frame.transpose() * ((np - nm) / (2.0 * h));
        out(i) = g.dot(Vec3(body(2, 1), body(0, 2), body(1, 0)));
    }
    return out;
}

namespace {

// Search workspace. All corrector solves run in "work" coordinates that are
// flipped through the e1 half-turn whenever the iterate sinks below
// kFlipLatitude; hemisphere integrals, energies and multipliers are
// invariant under the flip, so work results transfer back verbatim.
class SearchEngine {
  public:
    SearchEngine(double eps, const FieldSpec& k, const CorrectorOptions& opts)
        : eps_(eps), k_true_(k), k_(k), opts_(opts) {}

    void reset(const Vec3& z_true) {
        net_ = Mat3::Identity();
        k_ = k_true_;
        warm_.reset();
        z_ = z_true;
        maybe_flip();
    }

    // First-order stage: backtracking line search on central-difference
    // chart gradients of the reduced energy.
    void run_first_order(double sign, double scale) {
        const double gstop = std::max(1e-6, 1e-3 * std::abs(eps_) * scale);
        double step = 0.1;
        for (int iter = 0; iter < 150; ++iter) {
            maybe_flip();
            const Mat3 frame = north_transport(UnitVec3(z_)).mat();
            const Vec2 g = fd_gradient(frame);
            if (g.norm() <= gstop) break;
            const Vec2 dir = sign * g / g.norm();
            const double e0 = energy_at(z_);
            bool moved = false;
            while (step > 1e-10) {
                const Vec3 trial =
                    (z_ + step * (dir(0) * frame.col(0) + dir(1) * frame.col(1))).normalized();
                const double e1 = energy_at(trial);
                if (sign * (e1 - e0) > 0.1 * step * g.norm()) {
                    z_ = trial;
                    step = std::min(step * 1.7, 0.3);
                    moved = true;
                    break;
                }
                step *= 0.5;
            }
            if (!moved) break;
        }
    }

    // Newton stage on the multiplier gradient, which the corrector resolves
    // to its own tolerance rather than the differencing noise floor.
    bool polish() {
        double best = std::numeric_limits<double>::infinity();
        for (int iter = 0; iter < 20; ++iter) {
            maybe_flip();
            const Mat3 frame = north_transport(UnitVec3(z_)).mat();
            const StageResult center = solve_at(z_);
            const double mnorm = center.zeta.norm();
            if (mnorm <= 1e-12 * std::max(1.0, eps_)) return true;
            if (mnorm >= 0.7 * best)
                return best <= 0.3 * opts_.solution_tol || mnorm <= 0.3 * opts_.solution_tol;
            best = std::min(best, mnorm);
            const Vec2 g = multiplier_gradient(z_, center);
            Eigen::Matrix2d jac;
            const double h = 1e-4;
            for (int i = 0; i < 2; ++i) {
                const Vec3 zp = (z_ + h * frame.col(i)).normalized();
                const Vec3 zm = (z_ - h * frame.col(i)).normalized();
                const Vec2 gp = multiplier_gradient(zp, solve_at(zp));
                const Vec2 gm = multiplier_gradient(zm, solve_at(zm));
                jac.col(i) = (gp - gm) / (2.0 * h);
            }
            const double det = jac.determinant();
            if (std::abs(det) < 1e-14 * (1.0 + jac.squaredNorm())) break;
            Vec2 delta = -jac.inverse() * g;
            if (!delta.allFinite()) break;
            if (delta.norm() > 0.05) delta *= 0.05 / delta.norm();
            z_ = (z_ + delta(0) * frame.col(0) + delta(1) * frame.col(1)).normalized();
        }
        maybe_flip();
        return solve_at(z_).zeta.norm() <= 0.3 * opts_.solution_tol;
    }

    std::string classify() {
        maybe_flip();
        const Mat3 frame = north_transport(UnitVec3(z_)).mat();
        const auto f = [&](double s1, double s2) {
            return energy_at((z_ + s1 * frame.col(0) + s2 * frame.col(1)).normalized());
        };
        const double h = 1e-3;
        const double f0 = f(0, 0);
        Eigen::Matrix2d hess;
        hess(0, 0) = (f(h, 0) - 2 * f0 + f(-h, 0)) / (h * h);
        hess(1, 1) = (f(0, h) - 2 * f0 + f(0, -h)) / (h * h);
        hess(0, 1) = hess(1, 0) = (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4 * h * h);
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(hess);
        const Vec2 eig = es.eigenvalues();
        const double amax = std::max(std::abs(eig(0)), std::abs(eig(1)));
        const double amin = std::min(std::abs(eig(0)), std::abs(eig(1)));
        if (amin <= 1e-6 * amax) return "degenerate";
        if (eig(0) > 0) return "min";
        if (eig(1) < 0) return "max";
        return "saddle";
    }

    Vec3 true_z() const { return net_.transpose() * z_; }

    // Rotation carrying e3 to the true-coordinate critical point, built in
    // the numerically safe flipped frame.
    Rotation3 true_rotation() const {
        return Rotation3(Mat3(net_.transpose() * north_transport(UnitVec3(z_)).mat()));
    }

    double probe_energy(const Vec3& z_true) {
        reset(z_true);
        return energy_at(z_);
    }

  private:
    void maybe_flip() {
        if (z_.z() >= kFlipLatitude) return;
        const Mat3 r0 = half_turn_x();
        z_ = r0 * z_;
        k_ = k_.compose_linear(r0);
        net_ = r0 * net_;
        if (warm_) {
            for (auto& v : warm_->second) v = r0 * v;
            warm_->first = Rotation3(Mat3(r0 * warm_->first.mat()));
        }
    }

    StageResult solve_at(const Vec3& z) {
        const Rotation3 r = north_transport(UnitVec3(z));
        StageResult res;
        if (warm_) {
            const Mat3 t = r.mat() * warm_->first.mat().transpose();
            std::vector<Vec3> guess(warm_->second.size());
            for (size_t i = 0; i < guess.size(); ++i) guess[i] = t * warm_->second[i];
            try {
                res = run_stage(eps_, r, k_, opts_, std::move(guess));
            } catch (const CorrectorDivergenceError&) {
                res = cold_staged_solve(eps_, r, k_, opts_);
            }
        } else {
            res = cold_staged_solve(eps_, r, k_, opts_);
        }
        warm_ = std::make_pair(r, res.u);
        return res;
    }

    double energy_at(const Vec3& z) {
        const StageResult res = solve_at(z);
        const Loop u(res.u);
        return length_functional(u) +
               eps_ * area_functional(UnitVec3(Vec3(-z)), u, k_);
    }

    Vec2 fd_gradient(const Mat3& frame) {
        const double h = 1e-4;
        Vec2 g;
        for (int i = 0; i < 2; ++i) {
            const Vec3 zp = (z_ + h * frame.col(i)).normalized();
            const Vec3 zm = (z_ - h * frame.col(i)).normalized();
            g(i) = (energy_at(zp) - energy_at(zm)) / (2.0 * h);
        }
        return g;
    }

    Vec2 multiplier_gradient(const Vec3& z, const StageResult& res) {
        const Rotation3 r = north_transport(UnitVec3(z));
        const KernelBasis basis = kernel_basis(r, opts_.n);
        Mat3 gram_eps;
        for (int h = 0; h < 3; ++h)
            for (int j = 0; j < 3; ++j) {
                double s = 0.0;
                for (int i = 0; i < opts_.n; ++i)
                    s += (r.mat().col(h).cross(res.u[i])).dot(basis.fields[j].values[i]);
                gram_eps(h, j) = s / opts_.n;
            }
        const double len = length_functional(Loop(res.u));
        return chart_coords_of_so3_gradient(UnitVec3(z), gram_eps * res.zeta / len);
    }

    double eps_;
    FieldSpec k_true_;
    FieldSpec k_;  // work field
    CorrectorOptions opts_;
    Mat3 net_ = Mat3::Identity();
    Vec3 z_ = Vec3::UnitZ();
    std::optional<std::pair<Rotation3, std::vector<Vec3>>> warm_;
};

}  // namespace

SearchReport critical_search(double eps, const FieldSpec& k, const std::vector<UnitVec3>& seeds,
                             const CorrectorOptions& opts) {
    validate_opts(opts);
    if (std::abs(eps) > opts.eps_max)
        throw std::invalid_argument("epsilon beyond the configured maximum");
    SearchReport report;
    SearchEngine engine(eps, k, opts);
    const double scale = k.sup_estimate();

    std::vector<int> alive;
    double vmin = 0.0, vmax = 0.0, vabs = 0.0;
    for (int i = 0; i < int(seeds.size()); ++i) {
        try {
            const double e = engine.probe_energy(seeds[i].vec());
            if (report.grid.empty()) {
                vmin = vmax = e;
            } else {
                vmin = std::min(vmin, e);
                vmax = std::max(vmax, e);
            }
            vabs = std::max(vabs, std::abs(e));
            report.grid.push_back(seeds[i].vec());
            report.energies.push_back(e);
            alive.push_back(i);
        } catch (const CorrectorDivergenceError&) {
            report.failed_seeds.push_back(i);
        }
    }
    if (report.grid.empty()) return report;
    if (vmax - vmin <= 1e-9 * std::max(1.0, vabs)) {
        report.degenerate_landscape = true;
        return report;
    }

    const auto near_known = [&](const Vec3& z) {
        for (const auto& sol : report.solutions)
            if (geodesic_distance(UnitVec3(sol.z), UnitVec3(z)) < 1e-3) return true;
        return false;
    };

    for (const int idx : alive) {
        for (const double sign : {-1.0, 1.0}) {
            try {
                engine.reset(seeds[idx].vec());
                engine.run_first_order(sign, scale);
                if (near_known(engine.true_z())) continue;
                if (!engine.polish()) {
                    report.failed_seeds.push_back(idx);
                    continue;
                }
                if (near_known(engine.true_z())) continue;
                const std::string label = engine.classify();
                const Rotation3 rstar = engine.true_rotation();
                ReductionState state = solve_corrector(eps, rstar, k, opts);
                if (!criticality_check(state, opts.solution_tol).is_solution) {
                    report.failed_seeds.push_back(idx);
                    continue;
                }
                if (near_known(state.center.vec())) continue;
                report.solutions.push_back(SearchSolution{state.center.vec(), state, label});
            } catch (const CorrectorDivergenceError&) {
                report.failed_seeds.push_back(idx);
            }
        }
    }

    std::sort(report.solutions.begin(), report.solutions.end(),
              [&](const SearchSolution& a, const SearchSolution& b) {
                  const double ea = state_energy(a.state, k), eb = state_energy(b.state, k);
                  if (ea != eb) return ea < eb;
                  return std::lexicographical_compare(a.z.data(), a.z.data() + 3, b.z.data(),
                                                      b.z.data() + 3);
              });
    return report;
}

}  // namespace magsphere
