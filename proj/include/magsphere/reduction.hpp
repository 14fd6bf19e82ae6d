#pragma once

#include <string>
#include <vector>

#include "magsphere/field.hpp"
#include "magsphere/functionals.hpp"
#include "magsphere/loop.hpp"

namespace magsphere {

struct CorrectorOptions {
    double tol = 1e-10;        // residual and constraint sup stopping level
    int max_iters = 50;        // per continuation stage
    double eps_max = 0.5;
    double stage_step = 0.05;  // continuation step when starting cold
    int n = 256;               // loop samples
    double solution_tol = 1e-8;
};

// Converged corrector state at one rotation: the loop orthogonal to the
// great-circle family with its Lagrange multipliers.
struct ReductionState {
    double epsilon;
    Rotation3 rotation;
    UnitVec3 center;  // rotation * e3
    Loop corrected_loop;
    Vec3 multipliers;
    double residual_sup;    // sup of the multiplier-reduced Euler-Lagrange field
    double constraint_sup;  // sup of the kernel moments of the loop
    Mat3 gram_eps;          // mixed Gram pairing the loop frame with the kernel
    int newton_iters;
};

// Quasi-Newton corrector with the frozen great-circle linearization. Starts
// from the great circle itself and stages epsilon in steps of at most
// stage_step; throws CorrectorDivergenceError when a stage stalls.
ReductionState solve_corrector(double eps, const Rotation3& r, const FieldSpec& k,
                               const CorrectorOptions& opts = {});

struct ReducedEnergySample {
    Vec3 z;
    double energy;   // energy of the corrected loop, pole at -z
    double leading;  // first-order model 1 - (eps/2pi) * hemisphere integral
    double multiplier_norm;
};

// Reduced energy at the rotation carrying e3 to z. The chart degenerates at
// -e3 (callers pre-rotate the field to probe there).
ReducedEnergySample reduced_energy(double eps, const UnitVec3& z, const FieldSpec& k,
                                   const CorrectorOptions& opts = {});

struct CriticalityResult {
    bool is_solution;
    double multiplier_norm;
};

// A converged state solves the full equation exactly when its multipliers
// vanish; tolerance below solution_tol counts as vanishing.
CriticalityResult criticality_check(const ReductionState& state, double solution_tol = 1e-8);

// Rotation-group gradient of the reduced energy from the area-derivative
// formula: component h is eps * mean of K(u) (u ^ u') . (Re_h ^ u). Agrees
// with central differences of the energy and with gram_eps * multipliers
// divided by the length; used as a cross-check and for polishing.
Vec3 so3_energy_gradient(const ReductionState& state, const FieldSpec& k);

// Chart coefficients at z of a rotation-group cotangent vector with body
// components g: pairs g with the body velocities of the transported frame.
Vec2 chart_coords_of_so3_gradient(const UnitVec3& z, const Vec3& g);

struct SearchSolution {
    Vec3 z;
    ReductionState state;
    std::string classification;  // "min", "max", "saddle" or "degenerate"
};

struct SearchReport {
    std::vector<SearchSolution> solutions;
    std::vector<int> failed_seeds;  // seed indices whose run diverged or stalled
    bool degenerate_landscape = false;
    std::vector<Vec3> grid;  // probe points (the admitted seeds)
    std::vector<double> energies;
};

// Multi-start extremum search on the reduced energy: descent and ascent per
// seed with central-difference chart gradients (step 1e-4), then a Newton
// polish on the multiplier gradient, which is resolved far below the
// differencing noise. Solutions are deduplicated at geodesic distance 1e-3,
// classified by a finite-difference chart Hessian, re-solved, and must pass
// criticality_check to be listed.
SearchReport critical_search(double eps, const FieldSpec& k, const std::vector<UnitVec3>& seeds,
                             const CorrectorOptions& opts = {});

}  // namespace magsphere
