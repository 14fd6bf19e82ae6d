#pragma once

#include <functional>
#include <string>
#include <vector>

#include "magsphere/field.hpp"
#include "magsphere/sphere.hpp"

namespace magsphere {

// Cap quadrature resolution: Gauss-Legendre nodes in the polar cosine times
// a uniform azimuth rule. Exact for polynomial fields of degree <= 8 at the
// defaults.
struct QuadSpec {
    int radial = 24;
    int angular = 64;
};

// Integral of K over the hemisphere centered at z. The chart frame breaks
// down near -e3; there the field and the center are flipped through the
// half-turn about e1, which leaves the value unchanged.
double melnikov_value(const UnitVec3& z, const FieldSpec& k, QuadSpec quad = {});

// Central-difference gradient in the transported chart at z, step 1e-4 with
// normalization as the retraction.
TangentVec melnikov_gradient(const UnitVec3& z, const FieldSpec& k, QuadSpec quad = {});

struct CriticalPoint {
    Vec3 z;
    double value;
    std::string kind;  // "min", "max", "saddle" or "degenerate"
    Vec2 hessian_eigs;  // chart Hessian spectrum, ascending
    double grad_norm;
};

struct MelnikovReport {
    std::vector<Vec3> grid;
    std::vector<double> values;
    std::vector<CriticalPoint> critical_points;
    // Set when the sampled landscape is constant to 1e-9 relative; the
    // critical point list is then left empty.
    bool degenerate_landscape = false;
};

// Multi-start extremum search over the hemisphere integral: descent and
// ascent from every admitted seed, then a Newton polish on the exact
// boundary-moment gradient. Results are deduplicated at geodesic distance
// 1e-3 and classified by a finite-difference chart Hessian (step 1e-3).
MelnikovReport find_stable_critical_points(const FieldSpec& k,
                                           const std::function<bool(const Vec3&)>& region,
                                           const std::vector<UnitVec3>& seeds,
                                           QuadSpec quad = {});

struct DistinctnessReport {
    struct Candidate {
        Vec3 axis;           // canonical representative; -axis bounds the same circle
        double value_plus;   // hemisphere integral at the axis
        double value_minus;  // and at its antipode
        double circle_sup;   // residual max |K| on the boundary circle
    };
    std::vector<Candidate> candidates;
    double scale = 0.0;  // sup |K| used in the detection threshold
    bool condition_holds = true;
};

// Scans great circles for ones on which K vanishes (max |K| <= 1e-8 * scale
// over 128 samples) and compares the hemisphere integrals on the two sides.
// A coarse axis grid is sharpened by a smooth-surrogate descent plus a
// compass search, so circles far from any grid point are still found.
DistinctnessReport distinctness_check(const FieldSpec& k, int axis_grid = 500,
                                      QuadSpec quad = {});

}  // namespace magsphere
