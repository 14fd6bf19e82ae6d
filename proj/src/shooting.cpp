#include "magsphere/shooting.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "magsphere/errors.hpp"
#include "magsphere/functionals.hpp"

namespace magsphere {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Deriv {
    Vec3 dx;
    Vec3 dv;
};

Deriv rhs(const FieldSpec& k, const Vec3& x, const Vec3& v) {
    return Deriv{v, -v.squaredNorm() * x + k.eval(x) * x.cross(v)};
}

void rk4_step(const FieldSpec& k, double h, Vec3& x, Vec3& v) {
    const Deriv k1 = rhs(k, x, v);
    const Deriv k2 = rhs(k, x + 0.5 * h * k1.dx, v + 0.5 * h * k1.dv);
    const Deriv k3 = rhs(k, x + 0.5 * h * k2.dx, v + 0.5 * h * k2.dv);
    const Deriv k4 = rhs(k, x + h * k3.dx, v + h * k3.dv);
    x += h / 6.0 * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx);
    v += h / 6.0 * (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv);
}

void check_start(double c, const PhasePoint& start) {
    if (!(c > 0.0)) throw std::invalid_argument("speed must be positive");
    if (std::abs(start.position.vec().dot(start.velocity)) > 1e-10 * c)
        throw std::invalid_argument("start velocity not tangent");
    if (std::abs(start.velocity.norm() - c) > 1e-10 * c)
        throw std::invalid_argument("start velocity has the wrong speed");
}

struct FlowEnd {
    Vec3 x;
    Vec3 v;
    double norm_drift = 0.0;
    double speed_drift = 0.0;
};

// Shared stepping core; the recorder is invoked after each projected step.
template <typename Recorder>
FlowEnd run_flow(const FieldSpec& k, double c, const PhasePoint& start, double t_end, double dt,
                 Recorder&& record) {
    if (!(dt > 0.0)) throw StabilityError("step size must be positive");
    if (dt > 1e-2 * kTwoPi / c)
        throw StabilityError("step size too large for stable integration at this speed");
    const long n = std::max(1L, std::lround(std::ceil(t_end / dt - 1e-12)));
    const double h = t_end / n;
    FlowEnd end{start.position.vec(), start.velocity};
    for (long i = 0; i < n; ++i) {
        rk4_step(k, h, end.x, end.v);
        end.norm_drift = std::max(end.norm_drift, std::abs(end.x.norm() - 1.0));
        end.speed_drift = std::max(end.speed_drift, std::abs(end.v.norm() - c) / c);
        end.x.normalize();
        end.v -= end.v.dot(end.x) * end.x;
        end.v *= c / end.v.norm();
        record((i + 1) * h, end);
    }
    return end;
}

FlowEnd flow_endpoint(const FieldSpec& k, double c, const PhasePoint& start, double t_end,
                      double dt) {
    return run_flow(k, c, start, t_end, dt, [](double, const FlowEnd&) {});
}

PhasePoint rotate_start(const PhasePoint& base, double alpha, double beta) {
    const Vec3 x0 = base.position.vec();
    const Vec3 vhat = base.velocity.normalized();
    const Mat3 r = (Eigen::AngleAxisd(alpha, x0) * Eigen::AngleAxisd(beta, vhat)).toRotationMatrix();
    return PhasePoint{UnitVec3(Vec3(r * x0)), r * base.velocity};
}

}  // namespace

Trajectory integrate(const FieldSpec& k, double c, const PhasePoint& start, double t_end,
                     double dt) {
    check_start(c, start);
    if (!(t_end > 0.0)) throw std::invalid_argument("integration time must be positive");
    Trajectory traj;
    traj.times.push_back(0.0);
    traj.states.push_back(start);
    const FlowEnd end =
        run_flow(k, c, start, t_end, dt, [&](double t, const FlowEnd& e) {
            traj.times.push_back(t);
            traj.states.push_back(PhasePoint{UnitVec3(e.x), e.v});
        });
    traj.norm_drift = end.norm_drift;
    traj.speed_drift = end.speed_drift;
    return traj;
}

OrbitResult find_periodic(const FieldSpec& k, double c, const Loop& guess,
                          const ShootingOptions& opts) {
    if (!(c > 0.0)) throw std::invalid_argument("speed must be positive");
    const double dt = opts.dt > 0.0 ? opts.dt : kTwoPi / c / 2048.0;

    const auto du = derivative(guess, 1);
    if (du[0].norm() < 1e-8) throw DegenerateCurveError("guess loop has vanishing velocity");
    const PhasePoint base{UnitVec3(guess[0]), c * du[0].normalized()};
    double arc = 0.0;
    for (int i = 0; i < guess.size(); ++i) arc += du[i].norm();
    arc *= kTwoPi / guess.size();

    // Frozen section frame of the initial guess.
    const Vec3 n0 = base.position.vec();
    const Vec3 t0 = base.velocity.normalized();
    const Vec3 b0 = n0.cross(t0);

    const auto defect = [&](const Vec3& q) -> Vec3 {
        const PhasePoint s = rotate_start(base, q(0), q(1));
        const FlowEnd e = flow_endpoint(k, c, s, q(2), dt);
        const Vec3 dx = e.x - s.position.vec();
        const Vec3 dv = (e.v - s.velocity) / c;
        return Vec3(dx.dot(t0), dx.dot(b0), dv.dot(b0));
    };
    const auto closure = [&](const Vec3& q) {
        const PhasePoint s = rotate_start(base, q(0), q(1));
        const FlowEnd e = flow_endpoint(k, c, s, q(2), dt);
        return (e.x - s.position.vec()).norm() + (e.v - s.velocity).norm() / c;
    };

    Vec3 q(0.0, 0.0, arc / c);
    double err = closure(q);
    for (int iter = 0; iter < opts.max_iters && err > opts.tol; ++iter) {
        const Vec3 f0 = defect(q);
        Mat3 jac;
        for (int j = 0; j < 3; ++j) {
            Vec3 qp = q;
            qp(j) += opts.fd_step;
            jac.col(j) = (defect(qp) - f0) / opts.fd_step;
        }
        Vec3 delta = jac.fullPivLu().solve(-f0);
        if (!delta.allFinite())
            throw ShootingFailureError("singular shooting Jacobian", err);
        const double cap = 0.5 * q(2);
        if (std::abs(delta(2)) > cap) delta *= cap / std::abs(delta(2));
        if (delta.head<2>().norm() > 0.5) delta *= 0.5 / delta.head<2>().norm();
        q += delta;
        if (!(q(2) > 0.0)) throw ShootingFailureError("period collapsed", err);
        err = closure(q);
        if (!std::isfinite(err)) throw ShootingFailureError("orbit escaped", err);
    }
    if (err > opts.tol)
        throw ShootingFailureError("shooting Newton did not converge", err);

    // Resample one closed revolution at uniform time; the step count is a
    // multiple of the guess resolution so samples land on the grid exactly.
    const int n = guess.size();
    const long per = std::max(1L, std::lround(std::ceil(q(2) / dt / n - 1e-12)));
    const long steps = per * n;
    const double h = q(2) / steps;
    const PhasePoint s = rotate_start(base, q(0), q(1));
    std::vector<Vec3> pts;
    pts.reserve(n);
    pts.push_back(s.position.vec());
    double speed_drift = 0.0;
    {
        Vec3 x = s.position.vec(), v = s.velocity;
        for (long i = 0; i < steps; ++i) {
            rk4_step(k, h, x, v);
            speed_drift = std::max(speed_drift, std::abs(v.norm() - c) / c);
            x.normalize();
            v -= v.dot(x) * x;
            v *= c / v.norm();
            if ((i + 1) % per == 0 && long(pts.size()) < n) pts.push_back(x);
        }
    }
    const FlowEnd e = flow_endpoint(k, c, s, q(2), dt);
    const double final_err = (e.x - s.position.vec()).norm() + (e.v - s.velocity).norm() / c;
    return OrbitResult{s, q(2), Loop(std::move(pts)), final_err, speed_drift};
}

CrossValidation cross_validate(const ReductionState& state, const FieldSpec& k,
                               const ShootingOptions& opts) {
    const double eps = state.epsilon;
    const bool static_limit = eps == 0.0;
    const double c = static_limit ? 1.0 : 1.0 / std::abs(eps);
    const FieldSpec field = static_limit ? FieldSpec() : k;

    OrbitResult orbit = find_periodic(field, c, state.corrected_loop, opts);
    const double predicted =
        static_limit ? kTwoPi : kTwoPi * length_functional(state.corrected_loop) * std::abs(eps);
    const double rel = std::abs(orbit.period - predicted) / predicted;
    const double dist = phase_align_distance(orbit.samples, state.corrected_loop).distance;
    return CrossValidation{std::move(orbit), predicted, rel, dist};
}

}  // namespace magsphere
