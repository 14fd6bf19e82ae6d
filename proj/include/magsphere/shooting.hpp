#pragma once

#include <vector>

#include "magsphere/field.hpp"
#include "magsphere/loop.hpp"
#include "magsphere/reduction.hpp"
#include "magsphere/sphere.hpp"

namespace magsphere {

// State of the physical motion: a point on the sphere and its velocity,
// tangent at that point with |velocity| equal to the imposed speed.
struct PhasePoint {
    UnitVec3 position;
    Vec3 velocity;
};

// Fixed-step integration record. Drift fields track the worst per-step
// violation of the two conserved norms before projection puts them back.
struct Trajectory {
    std::vector<double> times;
    std::vector<PhasePoint> states;
    double norm_drift = 0.0;
    double speed_drift = 0.0;
};

struct ShootingOptions {
    double tol = 1e-8;
    double dt = 0.0;  // 0 selects (2*pi/c)/2048
    int max_iters = 30;
    double fd_step = 1e-7;
};

struct OrbitResult {
    PhasePoint initial;
    double period = 0.0;
    Loop samples;
    double closure_error = 0.0;
    double speed_drift = 0.0;
};

struct CrossValidation {
    OrbitResult orbit;
    double predicted_period = 0.0;
    double period_rel_error = 0.0;
    double aligned_distance = 0.0;
};

// Classical RK4 on (x, v) with x'' = -|v|^2 x + K(x) x^(cross)v, renormalizing
// |x| and re-tangentializing v to speed c after every step. The continuous
// flow conserves both norms exactly, so the projection only removes
// integrator drift. Steps land exactly on t_end; the step count is the
// smallest that keeps the step at or below dt. dt above one hundredth of a
// revolution time is rejected as unstable.
Trajectory integrate(const FieldSpec& k, double c, const PhasePoint& start, double t_end,
                     double dt);

// Closed-orbit search. Starting phase point comes from the guess loop at
// theta = 0 with velocity c*u'(0)/|u'(0)|. Newton runs on three unknowns:
// a rotation of the start frame about the start position (tilting the
// velocity), a rotation about the start velocity direction (sliding the
// position transverse to the flow), and the period. The defect takes the
// return-minus-start mismatch in the frame of the initial section through
// the start point orthogonal to the start velocity. Jacobian by forward
// differences with opts.fd_step. Converges when
// |x(T)-x(0)| + |v(T)-v(0)|/c <= opts.tol, else throws ShootingFailureError.
// The returned samples hold one revolution resampled at guess.size() uniform
// time points (uniform time is uniform arc length here).
OrbitResult find_periodic(const FieldSpec& k, double c, const Loop& guess,
                          const ShootingOptions& opts = {});

// Runs the orbit search on a corrected loop rescaled to physical speed
// c = 1/epsilon and compares against the variational prediction: period
// 2*pi*L(u)*epsilon and the loop itself up to phase. At epsilon = 0 the
// physical problem degenerates; the comparison then runs the field-free
// flow at c = 1 against the great circle with predicted period 2*pi.
CrossValidation cross_validate(const ReductionState& state, const FieldSpec& k,
                               const ShootingOptions& opts = {});

}  // namespace magsphere
