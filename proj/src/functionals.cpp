#include "magsphere/functionals.hpp"

#include <cmath>
#include <numbers>

#include "magsphere/errors.hpp"
#include "magsphere/quadrature.hpp"

namespace magsphere {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kRadialNodes = 32;

// g(w) = -K(chart^-1(w)) * (2/(1+|w|^2))^2, the planar density whose radial
// primitive closes the loop integral.
double gauge_density(const StereographicChart& chart, const FieldSpec& k, const Vec2& w) {
    return -k.eval(chart.inverse_vec(w)) * chart.area_factor(w);
}

double radial_primitive_segment(const StereographicChart& chart, const FieldSpec& k,
                                const Vec2& w, double t0, double t1) {
    const auto& rule = gauss_legendre(kRadialNodes);
    const double mid = 0.5 * (t0 + t1), half = 0.5 * (t1 - t0);
    double s = 0.0;
    for (size_t i = 0; i < rule.nodes.size(); ++i) {
        const double t = mid + half * rule.nodes[i];
        s += rule.weights[i] * t * gauge_density(chart, k, t * w);
    }
    return half * s;
}

// h(w) = int_0^1 t g(t w) dt. A single 32-node rule is ample while the
// integrand's poles at t = +-i/|w| stay away from [0, 1]; for far-out points
// the range is split dyadically in radius to keep that margin.
double radial_primitive(const StereographicChart& chart, const FieldSpec& k, const Vec2& w) {
    const double r = w.norm();
    if (r <= 4.0) return radial_primitive_segment(chart, k, w, 0.0, 1.0);
    double s = 0.0, t0 = 0.0;
    for (double edge = 4.0 / r; t0 < 1.0; edge *= 2.0) {
        const double t1 = std::min(1.0, edge);
        s += radial_primitive_segment(chart, k, w, t0, t1);
        t0 = t1;
    }
    return s;
}

void require_pole_clearance(const UnitVec3& pole, const Loop& u) {
    for (int i = 0; i < u.size(); ++i)
        if ((u[i] - pole.vec()).norm() <= 1e-3)
            throw PoleProximityError("loop passes too close to the gauge pole");
}

}  // namespace

double area_functional(const UnitVec3& pole, const Loop& u, const FieldSpec& k) {
    require_pole_clearance(pole, u);
    const StereographicChart chart(pole);
    const int n = u.size();
    Eigen::MatrixX2d gamma(n, 2);
    for (int i = 0; i < n; ++i) gamma.row(i) = chart.project(UnitVec3(u[i]));
    const auto& tab = SpectralTable::get(n);
    const Eigen::MatrixX2d dgamma = tab.d1() * gamma;
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        const Vec2 w = gamma.row(i);
        s += radial_primitive(chart, k, w) *
             (gamma(i, 0) * dgamma(i, 1) - gamma(i, 1) * dgamma(i, 0));
    }
    return s / n;
}

double area_unit_field(const UnitVec3& pole, const Loop& u) {
    require_pole_clearance(pole, u);
    const auto du = derivative(u, 1);
    double s = 0.0;
    for (int i = 0; i < u.size(); ++i)
        s += pole.vec().dot(u[i].cross(du[i])) / (1.0 - u[i].dot(pole.vec()));
    return s / u.size();
}

double area_surface_oracle(const UnitVec3& pole, const Loop& u, const FieldSpec& k) {
    if (!is_embedded(u)) throw OracleUnavailableError("surface oracle needs an embedded loop");
    const int n = u.size();

    Vec3 axis_sum = Vec3::Zero();
    Vec3 centroid = Vec3::Zero();
    for (int i = 0; i < n; ++i) {
        axis_sum += u[i].cross(u[(i + 1) % n]);
        centroid += u[i];
    }
    if (axis_sum.norm() < 1e-8)
        throw OracleUnavailableError("loop does not wind around a well-defined axis");
    // Fan center: spherical centroid, or the winding axis when the centroid
    // degenerates (great circles).
    const Vec3 c = centroid.norm() >= 1e-6 * n ? centroid.normalized() : axis_sum.normalized();

    // Right-handed tangent frame at the center: t1 x t2 = c.
    int a = 0;
    for (int i = 1; i < 3; ++i)
        if (std::abs(c[i]) < std::abs(c[a])) a = i;
    const Vec3 t1 = (Vec3::Unit(a) - c[a] * c).normalized();
    const Vec3 t2 = c.cross(t1);

    const int m = 2 * n;
    std::vector<FourierSeries> series;
    Eigen::MatrixX3d mu = u.matrix();
    for (int col = 0; col < 3; ++col) series.emplace_back(GridFun(mu.col(col)));

    GridFun alpha(m), rad(m);
    std::vector<Vec3> dir(m);
    double prev = 0.0;
    for (int j = 0; j <= m; ++j) {
        const double th = kTwoPi * j / m;
        Vec3 q(series[0].eval(th), series[1].eval(th), series[2].eval(th));
        q.normalize();
        double ang;
        {
            const double polar = std::atan2(q.cross(c).norm(), q.dot(c));
            if (polar < 1e-6 || polar > std::numbers::pi - 1e-6)
                throw OracleUnavailableError("loop touches the fan center or its antipode");
            const Vec3 d = (q - q.dot(c) * c).normalized();
            ang = std::atan2(d.dot(t2), d.dot(t1));
            if (j > 0) {
                while (ang < prev - std::numbers::pi) ang += kTwoPi;
                while (ang > prev + std::numbers::pi) ang -= kTwoPi;
            }
            if (j == m) {  // closure sample, only the unwrapped angle matters
                prev = ang;
                break;
            }
            rad[j] = polar;
            dir[j] = d;
            alpha[j] = ang;
        }
        prev = ang;
    }
    const double turns = (prev - alpha[0]) / kTwoPi;
    if (std::abs(std::abs(turns) - 1.0) > 0.05)
        throw OracleUnavailableError("loop does not make a single turn about the fan center");
    if (turns < 0.0) return -area_surface_oracle(pole, reversed(u), k);

    // Single positive turn from here on.
    const auto& tab = SpectralTable::get(m);
    GridFun beta(m);
    for (int j = 0; j < m; ++j) beta[j] = alpha[j] - kTwoPi * j / m;
    const GridFun dalpha = (tab.d1() * beta).array() + 1.0;
    for (int j = 0; j < m; ++j)
        if (dalpha[j] <= 0.0)
            throw OracleUnavailableError("loop is not star-shaped about the fan center");

    const auto& rule = gauss_legendre(kRadialNodes);
    double integral = 0.0;
    for (int j = 0; j < m; ++j) {
        const double half = 0.5 * rad[j];
        double inner = 0.0;
        for (size_t i = 0; i < rule.nodes.size(); ++i) {
            const double r = half * (1.0 + rule.nodes[i]);
            inner += rule.weights[i] * k.eval(std::cos(r) * c + std::sin(r) * dir[j]) * std::sin(r);
        }
        integral += dalpha[j] * half * inner;
    }
    integral *= kTwoPi / m;  // = integral of K over the center-side region

    // Which side is the pole on? Compare its polar distance from the center
    // with the loop radius at the pole's azimuth (alpha strictly increases).
    bool pole_inside;
    const Vec3 p = pole.vec();
    if (p.cross(c).norm() < 1e-12) {
        pole_inside = p.dot(c) > 0.0;
    } else {
        const Vec3 dp = (p - p.dot(c) * c).normalized();
        double ap = std::atan2(dp.dot(t2), dp.dot(t1));
        while (ap < alpha[0]) ap += kTwoPi;
        while (ap >= alpha[0] + kTwoPi) ap -= kTwoPi;
        double rho;
        if (ap >= alpha[m - 1]) {  // wrap segment between the last and first node
            const double span = alpha[0] + kTwoPi - alpha[m - 1];
            const double frac = span < 1e-15 ? 0.0 : (ap - alpha[m - 1]) / span;
            rho = rad[m - 1] + frac * (rad[0] - rad[m - 1]);
        } else {
            int lo = 0, hi = m - 1;
            while (hi - lo > 1) {
                const int mid = (lo + hi) / 2;
                (alpha[mid] <= ap ? lo : hi) = mid;
            }
            const double span = alpha[lo + 1] - alpha[lo];
            const double frac = span < 1e-15 ? 0.0 : (ap - alpha[lo]) / span;
            rho = rad[lo] + frac * (rad[lo + 1] - rad[lo]);
        }
        pole_inside = std::atan2(p.cross(c).norm(), p.dot(c)) < rho;
    }

    if (!pole_inside) return -integral / kTwoPi;
    return (sphere_mean(k) - integral) / kTwoPi;
}

EnergyBreakdown energy(const UnitVec3& pole, const Loop& u, const FieldSpec& k, double eps) {
    EnergyBreakdown e;
    e.length = length_functional(u);
    e.area = area_functional(pole, u, k);
    e.epsilon = eps;
    e.energy = e.length + eps * e.area;
    return e;
}

std::vector<Vec3> J0(const Loop& u) {
    const auto du = derivative(u, 1);
    const auto ddu = derivative(u, 2);
    std::vector<Vec3> j(u.size());
    for (int i = 0; i < u.size(); ++i) j[i] = -ddu[i] - du[i].squaredNorm() * u[i];
    return j;
}

std::vector<Vec3> Jeps(double eps, const Loop& u, const FieldSpec& k) {
    const double len = length_functional(u);  // rejects degenerate loops
    const auto du = derivative(u, 1);
    const auto ddu = derivative(u, 2);
    std::vector<Vec3> j(u.size());
    for (int i = 0; i < u.size(); ++i)
        j[i] = -ddu[i] - du[i].squaredNorm() * u[i] +
               eps * len * k.eval(u[i]) * u[i].cross(du[i]);
    return j;
}

KernelBasis kernel_basis(const Rotation3& r, int n) {
    Loop omega = great_circle(r, n);
    std::array<std::vector<Vec3>, 3> vals;
    for (int j = 0; j < 3; ++j) {
        vals[j].resize(n);
        const Vec3 axis = r.mat().col(j);
        for (int i = 0; i < n; ++i) vals[j][i] = axis.cross(omega[i]);
    }
    KernelBasis basis{{TangentLoopField(omega, std::move(vals[0])),
                       TangentLoopField(omega, std::move(vals[1])),
                       TangentLoopField(omega, std::move(vals[2]))},
                      Mat3::Zero()};
    for (int h = 0; h < 3; ++h)
        for (int j = 0; j < 3; ++j) {
            double s = 0.0;
            for (int i = 0; i < n; ++i)
                s += basis.fields[h].values[i].dot(basis.fields[j].values[i]);
            basis.gram(h, j) = s / n;
        }
    return basis;
}

namespace {

void require_base_is_great_circle(const Rotation3& r, const TangentLoopField& phi) {
    const Loop omega = great_circle(r, phi.base.size());
    for (int i = 0; i < phi.base.size(); ++i)
        if ((phi.base[i] - omega[i]).norm() > 1e-12)
            throw InvalidBaseError("field is not based at the expected great circle");
}

// Closed-form moving frame of the great circle. Differentiating the rounded
// samples instead would seed noise of order eps * n that a later second
// derivative amplifies past the 1e-10 exactness bounds.
std::vector<Vec3> circle_tangents(const Rotation3& r, int n) {
    std::vector<Vec3> t(n);
    for (int i = 0; i < n; ++i) {
        const double th = kTwoPi * i / n;
        t[i] = r * Vec3(-std::sin(th), std::cos(th), 0.0);
    }
    return t;
}

}  // namespace

TangentLoopField linearized_J0(const Rotation3& r, const TangentLoopField& phi) {
    require_base_is_great_circle(r, phi);
    const int n = phi.base.size();
    const auto& tab = SpectralTable::get(n);
    Eigen::MatrixX3d vals(n, 3);
    for (int i = 0; i < n; ++i) vals.row(i) = phi.values[i];
    Eigen::MatrixX3d dphi(n, 3), ddphi(n, 3);
    for (int c = 0; c < 3; ++c) {
        dphi.col(c) = tab.apply_d1(vals.col(c));
        ddphi.col(c) = tab.apply_d2(vals.col(c));
    }
    const auto tang = circle_tangents(r, n);
    std::vector<Vec3> out(n);
    for (int i = 0; i < n; ++i) {
        const Vec3 dp = dphi.row(i);
        out[i] = Vec3(-ddphi.row(i)) - 2.0 * tang[i].dot(dp) * phi.base[i] - phi.values[i];
    }
    return TangentLoopField(phi.base, std::move(out));
}

FrameCoeffs B_operator(const FrameCoeffs& g) {
    if (g.g1.size() != g.g2.size() || g.g1.size() < 32)
        throw std::invalid_argument("frame coefficients need matching grids");
    const auto& tab = SpectralTable::get(int(g.g1.size()));
    FrameCoeffs out;
    out.g1 = -tab.apply_d2(g.g1);
    out.g2 = -tab.apply_d2(g.g2) - g.g2;
    return out;
}

TangentLoopField solve_linearized(const Rotation3& r, const TangentLoopField& rhs) {
    require_base_is_great_circle(r, rhs);
    const int n = rhs.base.size();
    const KernelBasis basis = kernel_basis(r, n);

    double sup = 0.0;
    for (const auto& v : rhs.values) sup = std::max(sup, v.norm());
    for (int j = 0; j < 3; ++j) {
        double proj = 0.0;
        for (int i = 0; i < n; ++i) proj += rhs.values[i].dot(basis.fields[j].values[i]);
        if (std::abs(proj / n) > 1e-8 * std::max(1.0, sup))
            throw ProjectionViolationError("right-hand side has a kernel component");
    }

    // In the orthonormal frame {omega', omega ^ omega'} the operator is
    // diagonal in Fourier space; the two inverse tables apply its symbol
    // inverse and annihilate the kernel modes.
    const auto tang = circle_tangents(r, n);
    const Vec3 bino = r.mat().col(2);
    GridFun g1(n), g2(n);
    for (int i = 0; i < n; ++i) {
        g1[i] = rhs.values[i].dot(tang[i]);
        g2[i] = rhs.values[i].dot(bino);
    }
    const auto& tab = SpectralTable::get(n);
    const GridFun p1 = tab.apply_inv_neg_d2(g1);
    const GridFun p2 = tab.apply_inv_neg_d2_minus_id(g2);
    std::vector<Vec3> vals(n);
    for (int i = 0; i < n; ++i) vals[i] = p1[i] * tang[i] + p2[i] * bino;
    return TangentLoopField(rhs.base, std::move(vals));
}

}  // namespace magsphere
