#include "magsphere/field.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace magsphere {

namespace {

constexpr int kDim = FieldSpec::kMaxDegree + 1;

// Dense trivariate coefficient cube for composition arithmetic.
struct PolyCube {
    std::array<double, kDim * kDim * kDim> c{};
    static int idx(int a, int b, int d) { return (a * kDim + b) * kDim + d; }
    double& at(int a, int b, int d) { return c[idx(a, b, d)]; }
    double get(int a, int b, int d) const { return c[idx(a, b, d)]; }
};

PolyCube multiply(const PolyCube& p, const PolyCube& q, int dp, int dq) {
    PolyCube r;
    for (int a = 0; a <= dp; ++a)
        for (int b = 0; a + b <= dp; ++b)
            for (int d = 0; a + b + d <= dp; ++d) {
                const double pc = p.get(a, b, d);
                if (pc == 0.0) continue;
                for (int a2 = 0; a2 <= dq; ++a2)
                    for (int b2 = 0; a2 + b2 <= dq; ++b2)
                        for (int d2 = 0; a2 + b2 + d2 <= dq; ++d2) {
                            const double qc = q.get(a2, b2, d2);
                            if (qc == 0.0) continue;
                            r.at(a + a2, b + b2, d + d2) += pc * qc;
                        }
            }
    return r;
}

}  // namespace

FieldSpec::FieldSpec(std::vector<Monomial> terms) {
    for (const auto& t : terms) {
        if (t.ex < 0 || t.ey < 0 || t.ez < 0)
            throw std::invalid_argument("monomial exponents must be non-negative");
        if (t.ex + t.ey + t.ez > kMaxDegree)
            throw std::invalid_argument("total degree exceeds the supported maximum (8)");
    }
    std::sort(terms.begin(), terms.end(), [](const Monomial& a, const Monomial& b) {
        return std::tie(a.ex, a.ey, a.ez) < std::tie(b.ex, b.ey, b.ez);
    });
    for (const auto& t : terms) {
        if (!terms_.empty() && terms_.back().ex == t.ex && terms_.back().ey == t.ey &&
            terms_.back().ez == t.ez) {
            terms_.back().coef += t.coef;
        } else {
            terms_.push_back(t);
        }
    }
    std::erase_if(terms_, [](const Monomial& t) { return t.coef == 0.0; });
}

FieldSpec FieldSpec::preset(const std::string& name) {
    if (name == "linear_z") return FieldSpec({{0, 0, 1, 1.0}});
    if (name == "constant_one") return FieldSpec({{0, 0, 0, 1.0}});
    if (name == "xy_product") return FieldSpec({{1, 1, 0, 1.0}});
    throw std::invalid_argument("unknown field preset: " + name);
}

double FieldSpec::eval(const Vec3& p) const {
    double px[kDim], py[kDim], pz[kDim];
    px[0] = py[0] = pz[0] = 1.0;
    for (int i = 1; i < kDim; ++i) {
        px[i] = px[i - 1] * p.x();
        py[i] = py[i - 1] * p.y();
        pz[i] = pz[i - 1] * p.z();
    }
    double s = 0.0;
    for (const auto& t : terms_) s += t.coef * px[t.ex] * py[t.ey] * pz[t.ez];
    return s;
}

Vec3 FieldSpec::ambient_gradient(const Vec3& p) const {
    double px[kDim], py[kDim], pz[kDim];
    px[0] = py[0] = pz[0] = 1.0;
    for (int i = 1; i < kDim; ++i) {
        px[i] = px[i - 1] * p.x();
        py[i] = py[i - 1] * p.y();
        pz[i] = pz[i - 1] * p.z();
    }
    Vec3 g = Vec3::Zero();
    for (const auto& t : terms_) {
        if (t.ex > 0) g.x() += t.coef * t.ex * px[t.ex - 1] * py[t.ey] * pz[t.ez];
        if (t.ey > 0) g.y() += t.coef * t.ey * px[t.ex] * py[t.ey - 1] * pz[t.ez];
        if (t.ez > 0) g.z() += t.coef * t.ez * px[t.ex] * py[t.ey] * pz[t.ez - 1];
    }
    return g;
}

TangentVec FieldSpec::gradient(const UnitVec3& p) const {
    const Vec3 g = ambient_gradient(p.vec());
    return TangentVec(p, g - g.dot(p.vec()) * p.vec());
}

FieldSpec FieldSpec::compose_linear(const Mat3& a) const {
    std::vector<Monomial> out;
    for (const auto& t : terms_) {
        // (row_x . p)^ex (row_y . p)^ey (row_z . p)^ez expanded to monomials
        PolyCube acc;
        acc.at(0, 0, 0) = t.coef;
        int deg = 0;
        for (int axis = 0; axis < 3; ++axis) {
            const int e = axis == 0 ? t.ex : (axis == 1 ? t.ey : t.ez);
            PolyCube lin;
            lin.at(1, 0, 0) = a(axis, 0);
            lin.at(0, 1, 0) = a(axis, 1);
            lin.at(0, 0, 1) = a(axis, 2);
            for (int i = 0; i < e; ++i) {
                acc = multiply(acc, lin, deg, 1);
                ++deg;
            }
        }
        for (int ax = 0; ax <= deg; ++ax)
            for (int by = 0; ax + by <= deg; ++by)
                for (int cz = 0; ax + by + cz <= deg; ++cz) {
                    const double coef = acc.get(ax, by, cz);
                    if (coef != 0.0) out.push_back({ax, by, cz, coef});
                }
    }
    return FieldSpec(std::move(out));
}

FieldSpec FieldSpec::scaled(double s) const {
    std::vector<Monomial> out = terms_;
    for (auto& t : out) t.coef *= s;
    return FieldSpec(std::move(out));
}

FieldSpec FieldSpec::plus(const FieldSpec& other) const {
    std::vector<Monomial> out = terms_;
    out.insert(out.end(), other.terms_.begin(), other.terms_.end());
    return FieldSpec(std::move(out));
}

int FieldSpec::degree() const {
    int d = 0;
    for (const auto& t : terms_) d = std::max(d, t.ex + t.ey + t.ez);
    return d;
}

double FieldSpec::sup_estimate() const {
    if (terms_.empty()) return 0.0;
    double s = 0.0;
    for (const auto& p : fibonacci_sphere(2000)) s = std::max(s, std::abs(eval(p)));
    return s;
}

}  // namespace magsphere
