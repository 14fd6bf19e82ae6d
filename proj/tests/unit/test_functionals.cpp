#include <doctest.h>

#include <numbers>
#include <random>

#include "helpers.hpp"
#include "magsphere/errors.hpp"
#include "magsphere/functionals.hpp"

using namespace magsphere;
using namespace magsphere::testing;

namespace {

double mean_dot(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
    double s = 0.0;
    for (size_t k = 0; k < a.size(); ++k) s += a[k].dot(b[k]);
    return s / double(a.size());
}

Loop latitude_circle(double rho, int n = 256) {
    std::vector<Vec3> pts(n);
    for (int k = 0; k < n; ++k) {
        const double th = kTwoPi * k / n;
        pts[k] = Vec3(std::sin(rho) * std::cos(th), std::sin(rho) * std::sin(th), std::cos(rho));
    }
    return Loop(std::move(pts));
}

}  // namespace

TEST_CASE("area of the equator seen from the south pole") {
    const Loop omega = great_circle(Rotation3::identity(), 256);
    const UnitVec3 south(0.0, 0.0, -1.0);
    const FieldSpec one = FieldSpec::preset("constant_one");

    CHECK(area_functional(south, omega, one) == doctest::Approx(-1.0).epsilon(1e-10));
    CHECK(area_unit_field(south, omega) == doctest::Approx(-1.0).epsilon(1e-10));
    CHECK(area_functional(south, reversed(omega), one) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(area_unit_field(south, reversed(omega)) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("area vanishes on constant curves") {
    std::mt19937 rng(3);
    const FieldSpec k = random_field(rng);
    std::vector<Vec3> pts(64, Vec3::UnitX());
    const Loop point(std::move(pts));
    CHECK(std::abs(area_functional(UnitVec3(0.0, 0.0, -1.0), point, k)) <= 1e-12);
}

TEST_CASE("unit-field area of small latitude circles matches the cap area") {
    const UnitVec3 south(0.0, 0.0, -1.0);
    for (const double rho : {0.2, 0.5, 1.0}) {
        const double cap = kTwoPi * (1.0 - std::cos(rho));
        CHECK(area_unit_field(south, latitude_circle(rho)) ==
              doctest::Approx(-cap / kTwoPi).epsilon(1e-9));
    }
}

TEST_CASE("unit-field area of the equator seen from the north pole") {
    // Bounding the southern hemisphere positively means running clockwise
    // when seen from north, so reverse the standard equator.
    const Loop omega = great_circle(Rotation3::identity(), 256);
    CHECK(area_unit_field(UnitVec3(0.0, 0.0, 1.0), reversed(omega)) ==
          doctest::Approx(-1.0).epsilon(1e-10));
}

TEST_CASE("pole proximity guard") {
    const Loop omega = great_circle(Rotation3::identity(), 64);
    CHECK_THROWS_AS(area_unit_field(UnitVec3(1.0, 0.0, 0.0), omega), PoleProximityError);
    CHECK_THROWS_AS(
        area_functional(UnitVec3(1.0, 0.0, 0.0), omega, FieldSpec::preset("constant_one")),
        PoleProximityError);
}

TEST_CASE("surface oracle on hemispheres") {
    const Loop omega = great_circle(Rotation3::identity(), 256);
    const UnitVec3 south(0.0, 0.0, -1.0), north(0.0, 0.0, 1.0);
    const FieldSpec one = FieldSpec::preset("constant_one");
    const FieldSpec kz = FieldSpec::preset("linear_z");

    CHECK(area_surface_oracle(south, omega, one) == doctest::Approx(-1.0).epsilon(1e-8));
    CHECK(area_surface_oracle(south, omega, kz) == doctest::Approx(-0.5).epsilon(1e-8));
    CHECK(area_surface_oracle(north, reversed(omega), kz) ==
          doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("line integral agrees with the surface oracle") {
    std::mt19937 rng(31);
    std::vector<FieldSpec> fields;
    fields.push_back(FieldSpec::preset("constant_one"));
    fields.push_back(FieldSpec::preset("linear_z"));
    fields.push_back(FieldSpec::preset("xy_product"));
    fields.push_back(random_field(rng));
    fields.push_back(random_field(rng));

    for (int t = 0; t < 20; ++t) {
        const Loop u = wobble_loop(rng, 256, 0.2);
        // A pole far from the curve, on the side not enclosed.
        Vec3 c = Vec3::Zero();
        for (int k = 0; k < u.size(); ++k) c += u[k];
        const UnitVec3 pole(-c.normalized());
        for (const auto& k : fields) {
            const double line = area_functional(pole, u, k);
            const double surf = area_surface_oracle(pole, u, k);
            CHECK(std::abs(line - surf) <= 1e-7);
        }
    }
}

TEST_CASE("area locally constant in the pole") {
    std::mt19937 rng(41);
    const Loop u = wobble_loop(rng, 256, 0.2);
    const FieldSpec k = random_field(rng);
    Vec3 c = Vec3::Zero();
    for (int i = 0; i < u.size(); ++i) c += u[i];
    const Vec3 far = -c.normalized();

    const double base = area_functional(UnitVec3(far), u, k);
    std::normal_distribution<double> g(0.0, 0.05);
    for (int t = 0; t < 10; ++t) {
        const Vec3 p = (far + Vec3(g(rng), g(rng), g(rng))).normalized();
        CHECK(std::abs(area_functional(UnitVec3(p), u, k) - base) <= 1e-9);
    }
}

TEST_CASE("area rotation covariance") {
    std::mt19937 rng(43);
    for (int t = 0; t < 5; ++t) {
        const Loop u = wobble_loop(rng, 256, 0.2);
        const FieldSpec k = random_field(rng);
        const Rotation3 r = random_rotation(rng);
        Vec3 c = Vec3::Zero();
        for (int i = 0; i < u.size(); ++i) c += u[i];
        const UnitVec3 pole(-c.normalized());

        const double base = area_functional(pole, u, k);
        const double moved =
            area_functional(r * pole, rotated(r, u), k.compose_linear(Mat3(r.mat().transpose())));
        CHECK(std::abs(moved - base) <= 1e-9);
    }
}

TEST_CASE("energy assembly and invariance") {
    const Loop omega = great_circle(Rotation3::identity(), 256);
    const UnitVec3 south(0.0, 0.0, -1.0);
    const FieldSpec one = FieldSpec::preset("constant_one");

    const EnergyBreakdown e0 = energy(south, omega, one, 0.0);
    CHECK(e0.energy == doctest::Approx(1.0).epsilon(1e-12));

    const EnergyBreakdown e = energy(south, omega, one, 0.1);
    CHECK(e.length == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(e.area == doctest::Approx(-1.0).epsilon(1e-10));
    CHECK(e.energy == doctest::Approx(0.9).epsilon(1e-10));
    CHECK(e.energy == e.length + e.epsilon * e.area);

    std::mt19937 rng(47);
    const FieldSpec k = random_field(rng);
    const Loop u = wobble_loop(rng, 256, 0.2);
    Vec3 c = Vec3::Zero();
    for (int i = 0; i < u.size(); ++i) c += u[i];
    const UnitVec3 pole(-c.normalized());
    const Rotation3 r = random_rotation(rng);

    const double base = energy(pole, u, k, 0.07).energy;
    const double moved = energy(r * pole, rotated(r, u),
                                k.compose_linear(Mat3(r.mat().transpose())), 0.07)
                             .energy;
    CHECK(std::abs(moved - base) <= 1e-10);
}

TEST_CASE("J0 at great circles and its invariances") {
    std::mt19937 rng(53);
    const Rotation3 r = random_rotation(rng);
    const auto j = J0(great_circle(r, 256));
    for (const auto& v : j) CHECK(v.norm() <= 1e-10);

    const Loop u = wobble_loop(rng, 256, 0.2);
    const auto ju = J0(u);

    // Conservation along rotation orbits.
    for (int t = 0; t < 5; ++t) {
        const Vec3 q = random_unit(rng);
        std::vector<Vec3> qu(u.size());
        for (int k = 0; k < u.size(); ++k) qu[k] = q.cross(u[k]);
        CHECK(std::abs(mean_dot(ju, qu)) <= 1e-10);
    }

    // Equivariance. Rotating the samples re-rounds them, so the derivative
    // noise floors differ on the two paths.
    const Rotation3 r2 = random_rotation(rng);
    const auto jr = J0(rotated(r2, u));
    for (int k = 0; k < u.size(); ++k) CHECK((jr[k] - r2 * ju[k]).norm() <= 1e-10);
}

TEST_CASE("Jeps assembly") {
    std::mt19937 rng(59);
    const Loop u = wobble_loop(rng, 256, 0.2);
    const FieldSpec k = random_field(rng);

    const auto j0 = Jeps(0.0, u, k);
    const auto j0ref = J0(u);
    for (int i = 0; i < u.size(); ++i) CHECK((j0[i] - j0ref[i]).norm() <= 1e-15);

    const Loop omega = great_circle(Rotation3::identity(), 256);
    const auto jom = Jeps(0.3, omega, FieldSpec::preset("constant_one"));
    const auto dom = derivative(omega, 1);
    for (int i = 0; i < omega.size(); ++i) {
        CHECK(std::abs(jom[i].norm() - 0.3) <= 1e-9);
        CHECK((jom[i] - 0.3 * omega[i].cross(dom[i])).norm() <= 1e-9);
    }

    // Reparameterization invariance of the energy makes Jeps . u' average out.
    const auto j = Jeps(0.2, u, k);
    const auto du = derivative(u, 1);
    double sup = 0.0;
    for (const auto& v : j) sup = std::max(sup, v.norm());
    CHECK(std::abs(mean_dot(j, du)) <= 1e-10 * std::max(1.0, sup));

    CHECK_THROWS_AS(Jeps(0.1, Loop(std::vector<Vec3>(64, Vec3::UnitX())), k),
                    DegenerateCurveError);
}

TEST_CASE("Jeps is the gradient of the energy") {
    std::mt19937 rng(61);
    for (int t = 0; t < 30; ++t) {
        const Loop u = wobble_loop(rng, 256, 0.15);
        const FieldSpec k = random_field(rng);
        std::uniform_real_distribution<double> ed(0.01, 0.3);
        const double eps = ed(rng);
        Vec3 c = Vec3::Zero();
        for (int i = 0; i < u.size(); ++i) c += u[i];
        const UnitVec3 pole(-c.normalized());

        const TangentLoopField phi = random_tangent_field(rng, u);
        const auto j = Jeps(eps, u, k);
        const double lhs = mean_dot(j, phi.values);

        const double h = 1e-5;
        auto displaced = [&](double s) {
            std::vector<Vec3> pts(u.size());
            for (int i = 0; i < u.size(); ++i)
                pts[i] = (u[i] + s * phi.values[i]).normalized();
            return energy(pole, Loop(std::move(pts)), k, eps).energy;
        };
        const double rhs =
            length_functional(u) * (displaced(h) - displaced(-h)) / (2.0 * h);
        CHECK(std::abs(lhs - rhs) <= 1e-5 * std::max(1.0, std::abs(lhs)));
    }
}

TEST_CASE("kernel basis") {
    std::mt19937 rng(67);
    for (const Rotation3& r : {Rotation3::identity(), random_rotation(rng)}) {
        const KernelBasis kb = kernel_basis(r, 256);
        Mat3 expect = Mat3::Zero();
        expect(0, 0) = 0.5;
        expect(1, 1) = 0.5;
        expect(2, 2) = 1.0;
        CHECK((kb.gram - expect).cwiseAbs().maxCoeff() <= 1e-10);

        const Loop omega = great_circle(r, 256);
        for (int j = 0; j < 3; ++j) {
            for (int i = 0; i < 256; ++i) {
                CHECK(std::abs(kb.fields[j].values[i].dot(omega[i])) <= 1e-12);
                const Vec3 expect_field = r.mat().col(j).cross(omega[i]);
                CHECK((kb.fields[j].values[i] - expect_field).norm() <= 1e-12);
            }
            const TangentLoopField image = linearized_J0(r, kb.fields[j]);
            for (const auto& v : image.values) CHECK(v.norm() <= 1e-10);
        }
    }
}

TEST_CASE("linearized operator in the moving frame") {
    const Rotation3 id = Rotation3::identity();
    const Loop omega = great_circle(id, 256);
    const int n = omega.size();

    // Tangential perturbation psi * omega' with psi = cos 2theta; the frame
    // vectors are written out so no derivative noise enters the inputs.
    std::vector<Vec3> tang(n), bino(n), tfr(n);
    for (int k = 0; k < n; ++k) {
        const double th = omega.theta(k);
        tfr[k] = Vec3(-std::sin(th), std::cos(th), 0.0);
        tang[k] = std::cos(2 * th) * tfr[k];
        bino[k] = std::cos(th) * Vec3(0.0, 0.0, 1.0);
    }
    const TangentLoopField jt = linearized_J0(id, TangentLoopField(omega, std::move(tang)));
    for (int k = 0; k < n; ++k) {
        const double th = omega.theta(k);
        CHECK((jt.values[k] - 4.0 * std::cos(2 * th) * tfr[k]).norm() <= 1e-9);
    }

    const TangentLoopField jb = linearized_J0(id, TangentLoopField(omega, std::move(bino)));
    for (const auto& v : jb.values) CHECK(v.norm() <= 1e-10);
}

TEST_CASE("linearized operator is self adjoint and kernel orthogonal") {
    std::mt19937 rng(71);
    const Rotation3 r = random_rotation(rng);
    const Loop omega = great_circle(r, 256);

    const TangentLoopField phi = random_tangent_field(rng, omega);
    const TangentLoopField psi = random_tangent_field(rng, omega);
    const TangentLoopField jphi = linearized_J0(r, phi);
    const TangentLoopField jpsi = linearized_J0(r, psi);
    CHECK(std::abs(mean_dot(jphi.values, psi.values) - mean_dot(jpsi.values, phi.values)) <=
          1e-10);

    const KernelBasis kb = kernel_basis(r, 256);
    for (int j = 0; j < 3; ++j)
        CHECK(std::abs(mean_dot(jphi.values, kb.fields[j].values)) <= 1e-10);

    // Rejects fields based at a different curve.
    const Loop other = wobble_loop(rng, 256);
    const TangentLoopField bad = random_tangent_field(rng, other);
    CHECK_THROWS_AS(linearized_J0(r, bad), InvalidBaseError);
}

TEST_CASE("frame operator B") {
    const int n = 128;
    const auto& tab = SpectralTable::get(n);

    FrameCoeffs g{GridFun::Ones(n), GridFun::Zero(n)};
    FrameCoeffs bg = B_operator(g);
    CHECK(bg.g1.cwiseAbs().maxCoeff() <= 1e-11);
    CHECK(bg.g2.cwiseAbs().maxCoeff() <= 1e-11);

    FrameCoeffs gs{GridFun::Zero(n), GridFun(n)};
    for (int k = 0; k < n; ++k) gs.g2(k) = std::sin(tab.theta(k));
    bg = B_operator(gs);
    CHECK(bg.g1.cwiseAbs().maxCoeff() <= 1e-11);
    CHECK(bg.g2.cwiseAbs().maxCoeff() <= 1e-11);

    FrameCoeffs gc{GridFun(n), GridFun(n)};
    for (int k = 0; k < n; ++k) {
        gc.g1(k) = std::cos(2 * tab.theta(k));
        gc.g2(k) = std::cos(2 * tab.theta(k));
    }
    bg = B_operator(gc);
    for (int k = 0; k < n; ++k) {
        CHECK(bg.g1(k) == doctest::Approx(4.0 * gc.g1(k)).epsilon(1e-10));
        CHECK(bg.g2(k) == doctest::Approx(3.0 * gc.g2(k)).epsilon(1e-10));
    }
}

TEST_CASE("frame conjugacy and isometry") {
    std::mt19937 rng(73);
    const Rotation3 r = random_rotation(rng);
    const Loop omega = great_circle(r, 256);
    const TangentLoopField phi = random_tangent_field(rng, omega);

    // J0' phi computed directly equals the frame route through B. The frame
    // route differentiates the rounded circle samples, whose noise the
    // second derivative amplifies to a few 1e-10; a conjugacy defect would
    // show at the size of phi itself.
    const TangentLoopField direct = linearized_J0(r, phi);
    const TangentLoopField viaB = frame_compose(omega, B_operator(frame_decompose(omega, phi)));
    double err = 0.0;
    for (int k = 0; k < omega.size(); ++k)
        err = std::max(err, (direct.values[k] - viaB.values[k]).norm());
    CHECK(err <= 5e-9);

    // The frame map preserves the L2 pairing at great circles.
    const TangentLoopField psi = random_tangent_field(rng, omega);
    const FrameCoeffs gphi = frame_decompose(omega, phi);
    const FrameCoeffs gpsi = frame_decompose(omega, psi);
    const double framed = (gphi.g1.dot(gpsi.g1) + gphi.g2.dot(gpsi.g2)) / omega.size();
    CHECK(std::abs(framed - mean_dot(phi.values, psi.values)) <= 1e-10);
}

TEST_CASE("solve_linearized inverts on the kernel complement") {
    const Rotation3 id = Rotation3::identity();
    const Loop omega = great_circle(id, 256);
    const auto dom = derivative(omega, 1);
    const int n = omega.size();

    std::vector<Vec3> rhs1(n), rhs2(n);
    for (int k = 0; k < n; ++k) {
        const double th = omega.theta(k);
        rhs1[k] = std::cos(2 * th) * dom[k];
        rhs2[k] = std::cos(2 * th) * omega[k].cross(dom[k]);
    }
    const TangentLoopField phi1 = solve_linearized(id, TangentLoopField(omega, std::move(rhs1)));
    const TangentLoopField phi2 = solve_linearized(id, TangentLoopField(omega, std::move(rhs2)));
    for (int k = 0; k < n; ++k) {
        const double th = omega.theta(k);
        CHECK((phi1.values[k] - 0.25 * std::cos(2 * th) * dom[k]).norm() <= 1e-10);
        CHECK((phi2.values[k] - std::cos(2 * th) / 3.0 * omega[k].cross(dom[k])).norm() <=
              1e-10);
    }

    const TangentLoopField zero =
        solve_linearized(id, TangentLoopField(omega, std::vector<Vec3>(n, Vec3::Zero())));
    for (const auto& v : zero.values) CHECK(v.norm() == 0.0);

    // A right-hand side with a kernel component is rejected.
    const KernelBasis kb = kernel_basis(id, n);
    CHECK_THROWS_AS(solve_linearized(id, kb.fields[0]), ProjectionViolationError);
}

TEST_CASE("solve_linearized residual on random kernel-orthogonal data") {
    std::mt19937 rng(79);
    const Rotation3 r = random_rotation(rng);
    const Loop omega = great_circle(r, 256);
    const KernelBasis kb = kernel_basis(r, 256);

    for (int t = 0; t < 10; ++t) {
        TangentLoopField rhs = random_tangent_field(rng, omega);
        // Project out the kernel (gram is diagonal-dominant, solve exactly).
        Vec3 m;
        for (int j = 0; j < 3; ++j) m(j) = mean_dot(rhs.values, kb.fields[j].values);
        const Vec3 coef = kb.gram.fullPivLu().solve(m);
        std::vector<Vec3> vals = rhs.values;
        for (int k = 0; k < omega.size(); ++k)
            for (int j = 0; j < 3; ++j) vals[k] -= coef(j) * kb.fields[j].values[k];
        const TangentLoopField clean(omega, std::move(vals));

        const TangentLoopField phi = solve_linearized(r, clean);
        const TangentLoopField back = linearized_J0(r, phi);
        double err = 0.0;
        for (int k = 0; k < omega.size(); ++k)
            err = std::max(err, (back.values[k] - clean.values[k]).norm());
        CHECK(err <= 1e-10);

        // The solution itself is kernel-orthogonal.
        for (int j = 0; j < 3; ++j)
            CHECK(std::abs(mean_dot(phi.values, kb.fields[j].values)) <= 1e-10);
    }
}
