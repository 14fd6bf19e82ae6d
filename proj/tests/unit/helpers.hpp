#pragma once

#include <numbers>
#include <random>
#include <vector>

#include "magsphere/field.hpp"
#include "magsphere/loop.hpp"
#include "magsphere/sphere.hpp"

namespace magsphere::testing {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline Vec3 random_unit(std::mt19937& rng) {
    std::normal_distribution<double> g;
    Vec3 v(g(rng), g(rng), g(rng));
    while (v.norm() < 1e-3) v = Vec3(g(rng), g(rng), g(rng));
    return v.normalized();
}

inline Rotation3 random_rotation(std::mt19937& rng) {
    std::normal_distribution<double> g;
    Mat3 m;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) m(i, j) = g(rng);
    const Eigen::HouseholderQR<Mat3> qr(m);
    Mat3 q = qr.householderQ();
    // Fix the sign ambiguity so q is a proper rotation.
    Mat3 r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < 3; ++j)
        if (r(j, j) < 0) q.col(j) = -q.col(j);
    if (q.determinant() < 0) q.col(2) = -q.col(2);
    return Rotation3(q);
}

// Random polynomial field of total degree <= deg with a few terms.
inline FieldSpec random_field(std::mt19937& rng, int deg = 3, int nterms = 4) {
    std::uniform_int_distribution<int> pick(0, deg);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    std::vector<Monomial> ms;
    for (int t = 0; t < nterms; ++t) {
        int ex = pick(rng), ey = pick(rng), ez = pick(rng);
        while (ex + ey + ez > deg) {
            ex = pick(rng);
            ey = pick(rng);
            ez = pick(rng);
        }
        ms.push_back(Monomial{ex, ey, ez, coef(rng)});
    }
    return FieldSpec(ms);
}

// Smooth embedded loop: a great circle pushed toward its axis by a little
// low-frequency profile. Star-shaped about the axis for amplitudes << 1.
inline Loop wobble_loop(std::mt19937& rng, int n = 256, double amplitude = 0.25) {
    const Rotation3 r = random_rotation(rng);
    std::uniform_real_distribution<double> a(-amplitude, amplitude);
    const double a0 = a(rng), a1 = a(rng), b1 = a(rng), a2 = a(rng), b2 = a(rng), a3 = a(rng);
    const Vec3 axis = r.mat().col(2);
    std::vector<Vec3> pts(n);
    for (int k = 0; k < n; ++k) {
        const double th = kTwoPi * k / n;
        const double f = a0 + a1 * std::cos(th) + b1 * std::sin(th) + a2 * std::cos(2 * th) +
                         b2 * std::sin(2 * th) + a3 * std::cos(3 * th);
        const Vec3 base = r * Vec3(std::cos(th), std::sin(th), 0.0);
        pts[k] = (base + f * axis).normalized();
    }
    return Loop(std::move(pts));
}

// Random smooth tangent field along u, band-limited to |k| <= 3.
inline TangentLoopField random_tangent_field(std::mt19937& rng, const Loop& u) {
    std::uniform_real_distribution<double> c(-1.0, 1.0);
    double cs[7][6];
    for (auto& row : cs)
        for (double& x : row) x = c(rng);
    std::vector<Vec3> vals(u.size());
    for (int k = 0; k < u.size(); ++k) {
        const double th = kTwoPi * k / u.size();
        Vec3 w = Vec3::Zero();
        for (int m = 0; m <= 3; ++m) {
            const double ck = std::cos(m * th), sk = std::sin(m * th);
            w += ck * Vec3(cs[m][0], cs[m][1], cs[m][2]) + sk * Vec3(cs[m][3], cs[m][4], cs[m][5]);
        }
        vals[k] = w - w.dot(u[k]) * u[k];
    }
    return TangentLoopField(u, std::move(vals));
}

}  // namespace magsphere::testing
