#pragma once

#include <string>
#include <vector>

#include "magsphere/sphere.hpp"

namespace magsphere {

struct Monomial {
    int ex = 0, ey = 0, ez = 0;
    double coef = 0.0;
};

// Polynomial scalar field restricted to the sphere, total degree <= 8.
// Terms are kept combined and lexicographically sorted so identical fields
// have identical representations.
class FieldSpec {
  public:
    static constexpr int kMaxDegree = 8;

    FieldSpec() = default;  // the zero field
    explicit FieldSpec(std::vector<Monomial> terms);

    // Named fields used throughout: "linear_z" = z, "constant_one" = 1,
    // "xy_product" = x*y.
    static FieldSpec preset(const std::string& name);

    double eval(const Vec3& p) const;
    double eval(const UnitVec3& p) const { return eval(p.vec()); }

    Vec3 ambient_gradient(const Vec3& p) const;
    // Gradient projected onto the tangent plane at p.
    TangentVec gradient(const UnitVec3& p) const;

    // The field p -> K(A p); degree is preserved for any linear map A.
    FieldSpec compose_linear(const Mat3& a) const;

    FieldSpec scaled(double s) const;
    FieldSpec plus(const FieldSpec& other) const;

    const std::vector<Monomial>& terms() const { return terms_; }
    int degree() const;
    bool is_zero() const { return terms_.empty(); }

    // Max |K| over a dense deterministic grid; 0 for the zero field.
    double sup_estimate() const;

  private:
    std::vector<Monomial> terms_;
};

// Total integral of K over the sphere (not divided by the area 4pi),
// computed by the spherical-cap quadrature applied to the two hemispheres.
// Vanishes for fields obeying the Gauss law.
double sphere_mean(const FieldSpec& k);

}  // namespace magsphere
