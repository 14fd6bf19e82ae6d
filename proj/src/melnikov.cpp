#include "magsphere/melnikov.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "magsphere/quadrature.hpp"

namespace magsphere {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kFlipLatitude = -0.9;  // below this the e1 half-turn frame is used

Mat3 half_turn_x() {
    Mat3 r = Mat3::Identity();
    r(1, 1) = -1.0;
    r(2, 2) = -1.0;
    return r;
}

void check_quad(const QuadSpec& quad) {
    if (quad.radial < 16 || quad.angular < 32)
        throw std::invalid_argument("cap quadrature needs at least 16 x 32 nodes");
}

double cap_integral(const UnitVec3& z, const FieldSpec& k, const QuadSpec& quad) {
    const Mat3 frame = north_transport(z).mat();
    const auto& rule = gauss_legendre(quad.radial);
    double total = 0.0;
    for (int j = 0; j < quad.angular; ++j) {
        const double phi = kTwoPi * j / quad.angular;
        const Vec3 d = std::cos(phi) * frame.col(0) + std::sin(phi) * frame.col(1);
        double ray = 0.0;
        for (size_t i = 0; i < rule.nodes.size(); ++i) {
            const double t = 0.5 * (1.0 + rule.nodes[i]);  // polar cosine in [0, 1]
            ray += rule.weights[i] * k.eval(t * z.vec() + std::sqrt(1.0 - t * t) * d);
        }
        total += ray;
    }
    return total * 0.5 * kTwoPi / quad.angular;
}

// Exact gradient of the hemisphere integral: as z tilts, area enters and
// leaves through the boundary great circle, giving the circle moment of K.
Vec3 boundary_moment(const UnitVec3& z, const FieldSpec& k, int n_angular) {
    const Mat3 frame = north_transport(z).mat();
    Vec3 s = Vec3::Zero();
    for (int j = 0; j < n_angular; ++j) {
        const double phi = kTwoPi * j / n_angular;
        const Vec3 q = std::cos(phi) * frame.col(0) + std::sin(phi) * frame.col(1);
        s += k.eval(q) * q;
    }
    return s * (kTwoPi / n_angular);
}

// Working copy of (z, K) kept out of the chart's blind spot: whenever the
// iterate sinks below kFlipLatitude, both are flipped through the e1
// half-turn, which preserves hemisphere integrals.
struct WorkProblem {
    Vec3 z;
    FieldSpec k;
    Mat3 net = Mat3::Identity();

    WorkProblem(const UnitVec3& z0, const FieldSpec& k0) : z(z0.vec()), k(k0) { refresh(); }

    void refresh() {
        if (z.z() >= kFlipLatitude) return;
        const Mat3 r0 = half_turn_x();
        z = r0 * z;
        k = k.compose_linear(r0);  // r0 is its own transpose
        net = r0 * net;
    }

    Vec3 true_z() const { return net.transpose() * z; }
};

struct PolishOutcome {
    Vec3 z;
    double gnorm = 0.0;
    bool converged = false;
};

// Newton iteration on the exact boundary-moment gradient in the 2D chart.
PolishOutcome newton_polish(const UnitVec3& start, const FieldSpec& k0, const QuadSpec& quad,
                            double gtol) {
    WorkProblem w(start, k0);
    PolishOutcome out;
    for (int iter = 0; iter < 40; ++iter) {
        w.refresh();
        const Mat3 frame = north_transport(UnitVec3(w.z)).mat();
        const Vec3 g3 = boundary_moment(UnitVec3(w.z), w.k, quad.angular);
        const Vec2 g(g3.dot(frame.col(0)), g3.dot(frame.col(1)));
        out.gnorm = g.norm();
        if (out.gnorm <= gtol) {
            out.converged = true;
            break;
        }
        Eigen::Matrix2d hess;
        const double h = 1e-5;
        for (int i = 0; i < 2; ++i) {
            const Vec3 zp = (w.z + h * frame.col(i)).normalized();
            const Vec3 zm = (w.z - h * frame.col(i)).normalized();
            const Vec3 gp = boundary_moment(UnitVec3(zp), w.k, quad.angular);
            const Vec3 gm = boundary_moment(UnitVec3(zm), w.k, quad.angular);
            hess(0, i) = (gp - gm).dot(frame.col(0)) / (2.0 * h);
            hess(1, i) = (gp - gm).dot(frame.col(1)) / (2.0 * h);
        }
        hess = 0.5 * (hess + hess.transpose()).eval();
        const double det = hess.determinant();
        if (std::abs(det) < 1e-14 * (1.0 + hess.squaredNorm())) break;
        Vec2 delta = -hess.inverse() * g;
        if (!delta.allFinite()) break;
        if (delta.norm() > 0.2) delta *= 0.2 / delta.norm();
        w.z = (w.z + delta(0) * frame.col(0) + delta(1) * frame.col(1)).normalized();
    }
    out.z = w.true_z();
    return out;
}

// Backtracking first-order run; sign = +1 climbs, -1 descends.
Vec3 first_order_run(const UnitVec3& start, const FieldSpec& k0, const QuadSpec& quad,
                     double sign, double scale) {
    WorkProblem w(start, k0);
    double step = 0.25;
    const double gstop = 1e-6 * std::max(1.0, scale);
    for (int iter = 0; iter < 300; ++iter) {
        w.refresh();
        const Mat3 frame = north_transport(UnitVec3(w.z)).mat();
        const Vec3 g3 = boundary_moment(UnitVec3(w.z), w.k, quad.angular);
        const Vec2 g(g3.dot(frame.col(0)), g3.dot(frame.col(1)));
        if (g.norm() <= gstop) break;
        const Vec2 dir = sign * g / g.norm();
        const double f0 = melnikov_value(UnitVec3(w.z), w.k, quad);
        bool moved = false;
        while (step > 1e-12) {
            const Vec3 trial =
                (w.z + step * (dir(0) * frame.col(0) + dir(1) * frame.col(1))).normalized();
            const double f1 = melnikov_value(UnitVec3(trial), w.k, quad);
            if (sign * (f1 - f0) > 0.1 * step * g.norm()) {
                w.z = trial;
                step = std::min(step * 1.7, 0.5);
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if (!moved) break;
    }
    return w.true_z();
}

struct Classification {
    std::string kind;
    Vec2 eigs;
};

Classification classify(const UnitVec3& z0, const FieldSpec& k0, const QuadSpec& quad) {
    WorkProblem w(z0, k0);
    const Mat3 frame = north_transport(UnitVec3(w.z)).mat();
    const auto f = [&](double s1, double s2) {
        const Vec3 p = (w.z + s1 * frame.col(0) + s2 * frame.col(1)).normalized();
        return melnikov_value(UnitVec3(p), w.k, quad);
    };
    const double h = 1e-3;
    const double f0 = f(0.0, 0.0);
    Eigen::Matrix2d hess;
    hess(0, 0) = (f(h, 0) - 2.0 * f0 + f(-h, 0)) / (h * h);
    hess(1, 1) = (f(0, h) - 2.0 * f0 + f(0, -h)) / (h * h);
    hess(0, 1) = hess(1, 0) =
        (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4.0 * h * h);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(hess);
    const Vec2 eigs = es.eigenvalues();
    const double amax = std::max(std::abs(eigs(0)), std::abs(eigs(1)));
    const double amin = std::min(std::abs(eigs(0)), std::abs(eigs(1)));
    Classification c{"degenerate", eigs};
    if (amin > 1e-6 * amax) {
        if (eigs(0) > 0.0)
            c.kind = "min";
        else if (eigs(1) < 0.0)
            c.kind = "max";
        else
            c.kind = "saddle";
    }
    return c;
}

}  // namespace

double melnikov_value(const UnitVec3& z, const FieldSpec& k, QuadSpec quad) {
    check_quad(quad);
    if (z.z() < kFlipLatitude) {
        const Mat3 r0 = half_turn_x();
        return cap_integral(UnitVec3(Vec3(r0 * z.vec())), k.compose_linear(r0), quad);
    }
    return cap_integral(z, k, quad);
}

TangentVec melnikov_gradient(const UnitVec3& z, const FieldSpec& k, QuadSpec quad) {
    check_quad(quad);
    if (z.z() < kFlipLatitude) {
        const Mat3 r0 = half_turn_x();
        const TangentVec flipped =
            melnikov_gradient(UnitVec3(Vec3(r0 * z.vec())), k.compose_linear(r0), quad);
        return TangentVec(z, r0 * flipped.dir);
    }
    const Mat3 frame = north_transport(z).mat();
    const double h = 1e-4;
    Vec3 dir = Vec3::Zero();
    for (int i = 0; i < 2; ++i) {
        const Vec3 zp = (z.vec() + h * frame.col(i)).normalized();
        const Vec3 zm = (z.vec() - h * frame.col(i)).normalized();
        const double slope =
            (melnikov_value(UnitVec3(zp), k, quad) - melnikov_value(UnitVec3(zm), k, quad)) /
            (2.0 * h);
        dir += slope * frame.col(i);
    }
    return TangentVec(z, dir);
}

double sphere_mean(const FieldSpec& k) {
    const QuadSpec quad;
    return melnikov_value(UnitVec3(0, 0, 1), k, quad) +
           melnikov_value(UnitVec3(0, 0, -1), k, quad);
}

MelnikovReport find_stable_critical_points(const FieldSpec& k,
                                           const std::function<bool(const Vec3&)>& region,
                                           const std::vector<UnitVec3>& seeds, QuadSpec quad) {
    check_quad(quad);
    MelnikovReport report;
    const double scale = k.sup_estimate();

    double vmin = 0.0, vmax = 0.0, vabs = 0.0;
    for (size_t i = 0; i < seeds.size(); ++i) {
        const double v = melnikov_value(seeds[i], k, quad);
        report.grid.push_back(seeds[i].vec());
        report.values.push_back(v);
        vmin = i == 0 ? v : std::min(vmin, v);
        vmax = i == 0 ? v : std::max(vmax, v);
        vabs = std::max(vabs, std::abs(v));
    }
    if (seeds.empty()) return report;
    if (vmax - vmin <= 1e-9 * std::max(1.0, vabs)) {
        report.degenerate_landscape = true;
        return report;
    }

    const double gtol = 1e-10 * std::max(1.0, scale);
    std::vector<CriticalPoint> found;
    for (const auto& seed : seeds) {
        if (region && !region(seed.vec())) continue;
        for (const double sign : {-1.0, 1.0}) {
            const Vec3 settled = first_order_run(seed, k, quad, sign, scale);
            const PolishOutcome polish = newton_polish(UnitVec3(settled), k, quad, gtol);
            if (!polish.converged && polish.gnorm > 1e-8 * std::max(1.0, scale)) continue;
            const UnitVec3 zc(polish.z);
            bool duplicate = false;
            for (const auto& cp : found)
                if (geodesic_distance(UnitVec3(cp.z), zc) < 1e-3) {
                    duplicate = true;
                    break;
                }
            if (duplicate) continue;
            CriticalPoint cp;
            cp.z = zc.vec();
            cp.value = melnikov_value(zc, k, quad);
            cp.grad_norm = melnikov_gradient(zc, k, quad).dir.norm();
            const Classification cls = classify(zc, k, quad);
            cp.kind = cls.kind;
            cp.hessian_eigs = cls.eigs;
            found.push_back(std::move(cp));
        }
    }
    std::sort(found.begin(), found.end(), [](const CriticalPoint& a, const CriticalPoint& b) {
        if (a.value != b.value) return a.value > b.value;
        return std::lexicographical_compare(b.z.data(), b.z.data() + 3, a.z.data(), a.z.data() + 3);
    });
    report.critical_points = std::move(found);
    return report;
}

namespace {

// Sup and mean square of K over the great circle orthogonal to w, on a
// fixed 128-point rule. A polynomial of degree <= 8 restricted to the circle
// is a trigonometric polynomial of the same degree, so vanishing at all 128
// samples forces vanishing on the whole circle.
constexpr int kCircleSamples = 128;

double circle_sup(const Vec3& w, const FieldSpec& k) {
    const Mat3 frame = north_transport(UnitVec3(w)).mat();
    double s = 0.0;
    for (int j = 0; j < kCircleSamples; ++j) {
        const double phi = kTwoPi * j / kCircleSamples;
        const Vec3 q = std::cos(phi) * frame.col(0) + std::sin(phi) * frame.col(1);
        s = std::max(s, std::abs(k.eval(q)));
    }
    return s;
}

double circle_mean_square(const Vec3& w, const FieldSpec& k) {
    const Mat3 frame = north_transport(UnitVec3(w)).mat();
    double s = 0.0;
    for (int j = 0; j < kCircleSamples; ++j) {
        const double phi = kTwoPi * j / kCircleSamples;
        const Vec3 q = std::cos(phi) * frame.col(0) + std::sin(phi) * frame.col(1);
        const double v = k.eval(q);
        s += v * v;
    }
    return s / kCircleSamples;
}

// The axis functions live on the projective sphere (w and -w define the same
// circle); keep everything clear of the chart blind spot by flipping into
// the upper half when needed.
Vec3 axis_representative(const Vec3& w) {
    Vec3 v = w.normalized();
    if (v.z() < 0.0 || (v.z() == 0.0 && (v.y() < 0.0 || (v.y() == 0.0 && v.x() < 0.0))))
        v = -v;
    return v;
}

Vec3 refine_axis(const Vec3& seed, const FieldSpec& k) {
    Vec3 z = seed.z() < kFlipLatitude ? Vec3(-seed) : seed;

    // Smooth stage: damped Newton on the mean-square residual.
    for (int iter = 0; iter < 60; ++iter) {
        if (z.z() < kFlipLatitude) z = -z;
        const Mat3 frame = north_transport(UnitVec3(z)).mat();
        const double h = 1e-5;
        const auto f = [&](double s1, double s2) {
            return circle_mean_square(
                (z + s1 * frame.col(0) + s2 * frame.col(1)).normalized(), k);
        };
        const double f0 = f(0, 0);
        const Vec2 g((f(h, 0) - f(-h, 0)) / (2 * h), (f(0, h) - f(0, -h)) / (2 * h));
        Eigen::Matrix2d hess;
        hess(0, 0) = (f(h, 0) - 2 * f0 + f(-h, 0)) / (h * h);
        hess(1, 1) = (f(0, h) - 2 * f0 + f(0, -h)) / (h * h);
        hess(0, 1) = hess(1, 0) = (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4 * h * h);
        Vec2 delta;
        const double det = hess.determinant();
        if (std::abs(det) > 1e-14 * (1.0 + hess.squaredNorm()) && hess.trace() > 0.0)
            delta = -hess.inverse() * g;
        else
            delta = -0.1 * g;
        if (!delta.allFinite() || delta.norm() < 1e-12) break;
        if (delta.norm() > 0.3) delta *= 0.3 / delta.norm();
        const Vec3 trial = (z + delta(0) * frame.col(0) + delta(1) * frame.col(1)).normalized();
        if (circle_mean_square(trial, k) >= f0 && delta.norm() < 1e-10) break;
        z = trial;
    }

    // Nonsmooth stage: compass search directly on the sup, which decays
    // linearly toward a vanishing circle and is evaluated exactly.
    double radius = 1e-2;
    double best = circle_sup(z, k);
    while (radius > 1e-14) {
        if (z.z() < kFlipLatitude) z = -z;
        const Mat3 frame = north_transport(UnitVec3(z)).mat();
        bool improved = false;
        for (const auto& d : {Vec2(1, 0), Vec2(-1, 0), Vec2(0, 1), Vec2(0, -1), Vec2(1, 1),
                              Vec2(1, -1), Vec2(-1, 1), Vec2(-1, -1)}) {
            const Vec3 step = (d(0) * frame.col(0) + d(1) * frame.col(1)).normalized();
            const Vec3 trial = (z + radius * step).normalized();
            const double v = circle_sup(trial, k);
            if (v < best) {
                best = v;
                z = trial;
                improved = true;
                break;
            }
        }
        if (!improved) radius *= 0.5;
    }
    return z;
}

}  // namespace

DistinctnessReport distinctness_check(const FieldSpec& k, int axis_grid, QuadSpec quad) {
    check_quad(quad);
    DistinctnessReport report;
    report.scale = k.sup_estimate();
    const double vanish_tol = 1e-8 * report.scale;

    const auto axes = fibonacci_sphere(std::max(axis_grid, 16));
    std::vector<std::pair<double, Vec3>> ranked;
    ranked.reserve(axes.size());
    for (const auto& w : axes)
        ranked.emplace_back(circle_mean_square(w.vec(), k), w.vec());
    std::sort(ranked.begin(), ranked.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    std::vector<Vec3> hits;
    const auto consider = [&](const Vec3& w) {
        const Vec3 canon = axis_representative(w);
        // +-w carry the same circle, and near-equatorial axes canonicalize
        // to either sign, so the dedup must be projective.
        for (const auto& prev : hits)
            if (std::min(geodesic_distance(UnitVec3(prev), UnitVec3(canon)),
                         geodesic_distance(UnitVec3(prev), UnitVec3(Vec3(-canon)))) < 1e-3)
                return;
        if (circle_sup(canon, k) <= vanish_tol) hits.push_back(canon);
    };

    for (const auto& w : axes)
        if (circle_sup(w.vec(), k) <= vanish_tol) consider(w.vec());
    const int refine_count = std::min<int>(40, int(ranked.size()));
    for (int i = 0; i < refine_count; ++i) consider(refine_axis(ranked[i].second, k));

    for (const auto& w : hits) {
        DistinctnessReport::Candidate c;
        c.axis = w;
        c.circle_sup = circle_sup(w, k);
        c.value_plus = melnikov_value(UnitVec3(w), k, quad);
        c.value_minus = melnikov_value(UnitVec3(Vec3(-w)), k, quad);
        if (std::abs(c.value_plus - c.value_minus) > 1e-6 * report.scale)
            report.condition_holds = false;
        report.candidates.push_back(c);
    }
    return report;
}

}  // namespace magsphere
