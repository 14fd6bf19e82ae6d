#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <vector>

#include "magsphere/errors.hpp"

namespace magsphere {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec2 = Eigen::Vector2d;

// Point on the unit sphere. Construction normalizes, so |v| = 1 to machine
// precision from then on.
class UnitVec3 {
  public:
    explicit UnitVec3(const Vec3& v) {
        const double n = v.norm();
        if (n < 1e-14)
            throw DegenerateCurveError("cannot normalize a near-zero vector");
        v_ = v / n;
    }
    UnitVec3(double x, double y, double z) : UnitVec3(Vec3(x, y, z)) {}

    const Vec3& vec() const { return v_; }
    double x() const { return v_.x(); }
    double y() const { return v_.y(); }
    double z() const { return v_.z(); }

  private:
    Vec3 v_;
};

// Proper rotation. Constructor accepts matrices with orthogonality drift up
// to 1e-9 and polar-projects them back onto SO(3) whenever drift exceeds
// 1e-12, so products stay orthonormal through long chains.
class Rotation3 {
  public:
    explicit Rotation3(const Mat3& m);
    static Rotation3 identity() { return Rotation3(Mat3::Identity()); }

    const Mat3& mat() const { return m_; }
    Rotation3 transpose() const { return Rotation3(Mat3(m_.transpose())); }

    Vec3 operator*(const Vec3& v) const { return m_ * v; }
    UnitVec3 operator*(const UnitVec3& v) const { return UnitVec3(Vec3(m_ * v.vec())); }
    Rotation3 operator*(const Rotation3& o) const { return Rotation3(Mat3(m_ * o.m_)); }

  private:
    Mat3 m_;
};

// Tangent vector attached to a base point; constructor removes any radial
// leak below 1e-6 and rejects anything larger as a caller bug.
struct TangentVec {
    TangentVec(const UnitVec3& base_, const Vec3& dir_);
    UnitVec3 base;
    Vec3 dir;
};

// Generators T_h of rotations about the coordinate axes: T_h v = e_h x v.
const std::array<Mat3, 3>& rotation_generators();

// Rotation about axis e_h by the unit complex number xi = (cos a, sin a);
// d/da at a=0 is exactly rotation_generators()[h-1].
Rotation3 axis_rotation(int h, std::complex<double> xi);

// Derivative of R e_h ^ (.) along the orbit of the rotation group at R q.
TangentVec orbit_differential(const Rotation3& R, const UnitVec3& q, int h);

// Rotation mapping e3 to z, smooth away from -e3 (rejects |z+e3| <= 1e-6).
Rotation3 north_transport(const UnitVec3& z);

double geodesic_distance(const UnitVec3& a, const UnitVec3& b);

// Deterministic quasi-uniform sphere covering (golden-angle lattice).
std::vector<UnitVec3> fibonacci_sphere(int n);

// Stereographic chart from the pole p onto the plane through the origin
// orthogonal to p. The in-plane frame (t1, t2) is chosen with t1 x t2 = -p,
// which keeps the pullback of the outward-oriented area form positive:
// the inverse Jacobian area factor is (2/(1+|w|^2))^2.
class StereographicChart {
  public:
    explicit StereographicChart(const UnitVec3& pole);

    Vec2 project(const UnitVec3& q) const;
    UnitVec3 inverse(const Vec2& w) const;
    Vec3 inverse_vec(const Vec2& w) const;  // same point, no unit wrapper
    double area_factor(const Vec2& w) const {
        const double s = 2.0 / (1.0 + w.squaredNorm());
        return s * s;
    }
    const UnitVec3& pole() const { return pole_; }
    const Vec3& t1() const { return t1_; }
    const Vec3& t2() const { return t2_; }

  private:
    UnitVec3 pole_;
    Vec3 t1_, t2_;
};

}  // namespace magsphere
