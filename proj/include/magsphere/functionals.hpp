#pragma once

#include <array>

#include "magsphere/field.hpp"
#include "magsphere/loop.hpp"

namespace magsphere {

// Magnetic area term A_K(p; u): the loop is closed up by a gauge primitive
// of -K times the area form, pulled back through the stereographic chart at
// the pole p. Requires min_k |u_k - p| > 1e-3.
double area_functional(const UnitVec3& pole, const Loop& u, const FieldSpec& k);

// Closed form of the area term for K = 1: integral average of
// p . (u ^ u') / (1 - u . p).
double area_unit_field(const UnitVec3& pole, const Loop& u);

// Independent surface-quadrature oracle: -(1/2pi) * integral of K over the
// component of the complement of u not containing the pole, signed by the
// loop's orientation as that component's boundary. The loop must be embedded
// and star-shaped about the spherical centroid of the side it winds around.
double area_surface_oracle(const UnitVec3& pole, const Loop& u, const FieldSpec& k);

struct EnergyBreakdown {
    double length;
    double area;
    double epsilon;
    double energy;  // length + epsilon * area
};

EnergyBreakdown energy(const UnitVec3& pole, const Loop& u, const FieldSpec& k, double eps);

// Euler-Lagrange fields along the loop (ambient 3-vectors per sample):
// J0 = -u'' - |u'|^2 u, and Jeps adds eps * L(u) * K(u) u ^ u'.
std::vector<Vec3> J0(const Loop& u);
std::vector<Vec3> Jeps(double eps, const Loop& u, const FieldSpec& k);

struct KernelBasis {
    std::array<TangentLoopField, 3> fields;  // R e_j ^ omega_R
    Mat3 gram;                               // integral-average pairings
};

KernelBasis kernel_basis(const Rotation3& r, int n);

// Linearization of J0 at the great circle omega_R, acting on tangent fields.
TangentLoopField linearized_J0(const Rotation3& r, const TangentLoopField& phi);

// Frame form of the same operator: (g1, g2) -> (-g1'', -g2'' - g2).
FrameCoeffs B_operator(const FrameCoeffs& g);

// Inverts linearized_J0 on the orthogonal complement of its kernel. The
// right-hand side must be based at omega_R and kernel-orthogonal to 1e-8.
TangentLoopField solve_linearized(const Rotation3& r, const TangentLoopField& rhs);

}  // namespace magsphere
