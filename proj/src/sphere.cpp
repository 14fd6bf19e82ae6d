#include "magsphere/sphere.hpp"

#include <cmath>
#include <numbers>

namespace magsphere {

namespace {

double ortho_drift(const Mat3& m) {
    return (m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff();
}

Mat3 polar_project(const Mat3& m) {
    Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 r = svd.matrixU() * svd.matrixV().transpose();
    if (r.determinant() < 0.0) {
        Mat3 flip = Mat3::Identity();
        flip(2, 2) = -1.0;
        r = svd.matrixU() * flip * svd.matrixV().transpose();
    }
    return r;
}

}  // namespace

Rotation3::Rotation3(const Mat3& m) : m_(m) {
    const double drift = ortho_drift(m_);
    if (drift > 1e-9 || m_.determinant() < 0.0)
        throw std::invalid_argument("matrix is not a proper rotation");
    if (drift > 1e-12) m_ = polar_project(m_);
}

TangentVec::TangentVec(const UnitVec3& base_, const Vec3& dir_) : base(base_), dir(dir_) {
    const double radial = dir.dot(base.vec());
    if (std::abs(radial) > 1e-6 * std::max(1.0, dir.norm()))
        throw ProjectionViolationError("direction has a non-negligible radial component");
    dir -= radial * base.vec();
}

const std::array<Mat3, 3>& rotation_generators() {
    static const std::array<Mat3, 3> gen = [] {
        std::array<Mat3, 3> g;
        for (auto& m : g) m = Mat3::Zero();
        g[0](1, 2) = -1.0; g[0](2, 1) = 1.0;   // e1 ^ .
        g[1](0, 2) = 1.0;  g[1](2, 0) = -1.0;  // e2 ^ .
        g[2](0, 1) = -1.0; g[2](1, 0) = 1.0;   // e3 ^ .
        return g;
    }();
    return gen;
}

Rotation3 axis_rotation(int h, std::complex<double> xi) {
    if (h < 1 || h > 3) throw std::invalid_argument("axis index must be 1, 2 or 3");
    if (std::abs(std::abs(xi) - 1.0) > 1e-9)
        throw std::invalid_argument("rotation parameter must lie on the unit circle");
    const double c = xi.real(), s = xi.imag();
    Mat3 m = Mat3::Identity();
    switch (h) {
        case 1: m << 1, 0, 0, 0, c, -s, 0, s, c; break;
        case 2: m << c, 0, s, 0, 1, 0, -s, 0, c; break;
        case 3: m << c, -s, 0, s, c, 0, 0, 0, 1; break;
    }
    return Rotation3(m);
}

TangentVec orbit_differential(const Rotation3& R, const UnitVec3& q, int h) {
    if (h < 1 || h > 3) throw std::invalid_argument("axis index must be 1, 2 or 3");
    const Vec3 rq = R * q.vec();
    const Vec3 axis = R.mat().col(h - 1);  // R e_h
    return TangentVec(UnitVec3(rq), axis.cross(rq));
}

Rotation3 north_transport(const UnitVec3& z) {
    const Vec3& v = z.vec();
    const double denom = 1.0 + v.z();
    if ((v + Vec3::UnitZ()).norm() <= 1e-6)
        throw PoleSingularityError("north transport is singular at -e3");
    Mat3 m;
    m << 1.0 - v.x() * v.x() / denom, -v.x() * v.y() / denom, v.x(),
        -v.x() * v.y() / denom, 1.0 - v.y() * v.y() / denom, v.y(),
        -v.x(), -v.y(), v.z();
    return Rotation3(m);
}

double geodesic_distance(const UnitVec3& a, const UnitVec3& b) {
    return std::atan2(a.vec().cross(b.vec()).norm(), a.vec().dot(b.vec()));
}

std::vector<UnitVec3> fibonacci_sphere(int n) {
    if (n < 1) throw std::invalid_argument("need at least one point");
    std::vector<UnitVec3> pts;
    pts.reserve(n);
    const double golden_angle = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < n; ++i) {
        const double z = 1.0 - 2.0 * (i + 0.5) / n;
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double a = golden_angle * i;
        pts.emplace_back(Vec3(r * std::cos(a), r * std::sin(a), z));
    }
    return pts;
}

StereographicChart::StereographicChart(const UnitVec3& pole) : pole_(pole) {
    // Pick the coordinate axis least aligned with the pole, make it tangent,
    // then close the frame with t2 = (-p) x t1 so that t1 x t2 = -p.
    const Vec3& p = pole_.vec();
    int a = 0;
    for (int i = 1; i < 3; ++i)
        if (std::abs(p[i]) < std::abs(p[a])) a = i;
    t1_ = (Vec3::Unit(a) - p[a] * p).normalized();
    t2_ = (-p).cross(t1_);
}

Vec2 StereographicChart::project(const UnitVec3& q) const {
    const double denom = 1.0 - q.vec().dot(pole_.vec());
    if (denom <= 1e-12)
        throw PoleSingularityError("stereographic projection evaluated at its pole");
    return Vec2(q.vec().dot(t1_) / denom, q.vec().dot(t2_) / denom);
}

Vec3 StereographicChart::inverse_vec(const Vec2& w) const {
    const double s = 1.0 + w.squaredNorm();
    return (2.0 * w.x() * t1_ + 2.0 * w.y() * t2_ + (w.squaredNorm() - 1.0) * pole_.vec()) / s;
}

UnitVec3 StereographicChart::inverse(const Vec2& w) const { return UnitVec3(inverse_vec(w)); }

}  // namespace magsphere
