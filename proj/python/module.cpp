#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "magsphere/config.hpp"
#include "magsphere/field.hpp"
#include "magsphere/functionals.hpp"
#include "magsphere/loop.hpp"
#include "magsphere/melnikov.hpp"
#include "magsphere/reduction.hpp"
#include "magsphere/shooting.hpp"

namespace py = pybind11;
using namespace magsphere;

namespace {

Loop loop_from_matrix(const Eigen::MatrixX3d& m) {
    std::vector<Vec3> pts(m.rows());
    for (Eigen::Index i = 0; i < m.rows(); ++i) pts[i] = m.row(i);
    return Loop(std::move(pts));
}

Eigen::MatrixX3d points_to_matrix(const std::vector<UnitVec3>& pts) {
    Eigen::MatrixX3d m(Eigen::Index(pts.size()), 3);
    for (Eigen::Index i = 0; i < m.rows(); ++i) m.row(i) = pts[size_t(i)].vec();
    return m;
}

}  // namespace

PYBIND11_MODULE(magsphere, m) {
    m.doc() = "closed magnetic geodesics on the unit sphere";

    py::class_<FieldSpec>(m, "FieldSpec")
        .def(py::init([](const std::vector<std::tuple<int, int, int, double>>& terms) {
                 std::vector<Monomial> ms;
                 for (const auto& [ex, ey, ez, c] : terms) ms.push_back(Monomial{ex, ey, ez, c});
                 return FieldSpec(std::move(ms));
             }),
             py::arg("monomials"), "build from [(ex, ey, ez, coef), ...]")
        .def_static("preset", &FieldSpec::preset, py::arg("name"))
        .def("eval", [](const FieldSpec& k, const Vec3& p) { return k.eval(p); }, py::arg("p"))
        .def("degree", &FieldSpec::degree)
        .def("sup_estimate", &FieldSpec::sup_estimate)
        .def("is_zero", &FieldSpec::is_zero);
    m.def("sphere_mean", &sphere_mean, py::arg("field"));

    py::class_<Loop>(m, "Loop")
        .def(py::init(&loop_from_matrix), py::arg("samples"),
             "N x 3 unit vectors at theta_k = 2 pi k / N")
        .def("matrix", &Loop::matrix)
        .def("size", &Loop::size);
    m.def("great_circle",
          [](const Vec3& axis, int n) { return great_circle(north_transport(UnitVec3(axis)), n); },
          py::arg("axis"), py::arg("n") = 256,
          "great circle bounding the hemisphere centered at axis");
    m.def("length_functional", &length_functional, py::arg("loop"));
    m.def("geodesic_curvature",
          [](const Loop& u) { return Eigen::VectorXd(geodesic_curvature(u)); }, py::arg("loop"));
    m.def("is_embedded", &is_embedded, py::arg("loop"));
    m.def("phase_align_distance",
          [](const Loop& u, const Loop& v) {
              const AlignResult r = phase_align_distance(u, v);
              return py::make_tuple(r.distance, r.phase);
          },
          py::arg("u"), py::arg("v"));
    m.def("fibonacci_sphere",
          [](int n) { return points_to_matrix(fibonacci_sphere(n)); }, py::arg("n"));

    m.def("area_functional",
          [](const Vec3& pole, const Loop& u, const FieldSpec& k) {
              return area_functional(UnitVec3(pole), u, k);
          },
          py::arg("pole"), py::arg("loop"), py::arg("field"));
    m.def("area_unit_field",
          [](const Vec3& pole, const Loop& u) { return area_unit_field(UnitVec3(pole), u); },
          py::arg("pole"), py::arg("loop"));
    m.def("energy",
          [](const Vec3& pole, const Loop& u, const FieldSpec& k, double eps) {
              const EnergyBreakdown b = energy(UnitVec3(pole), u, k, eps);
              py::dict d;
              d["length"] = b.length;
              d["area"] = b.area;
              d["epsilon"] = b.epsilon;
              d["energy"] = b.energy;
              return d;
          },
          py::arg("pole"), py::arg("loop"), py::arg("field"), py::arg("epsilon"));

    m.def("melnikov_value",
          [](const Vec3& z, const FieldSpec& k) { return melnikov_value(UnitVec3(z), k); },
          py::arg("z"), py::arg("field"), "integral of the field over the hemisphere at z");
    m.def("melnikov_gradient",
          [](const Vec3& z, const FieldSpec& k) {
              return Vec3(melnikov_gradient(UnitVec3(z), k).dir);
          },
          py::arg("z"), py::arg("field"));

    py::class_<ReductionState>(m, "ReductionState")
        .def_readonly("epsilon", &ReductionState::epsilon)
        .def_property_readonly("center",
                               [](const ReductionState& s) { return s.center.vec(); })
        .def_readonly("corrected_loop", &ReductionState::corrected_loop)
        .def_readonly("multipliers", &ReductionState::multipliers)
        .def_readonly("residual_sup", &ReductionState::residual_sup)
        .def_readonly("constraint_sup", &ReductionState::constraint_sup)
        .def_readonly("newton_iters", &ReductionState::newton_iters);
    m.def("solve_corrector",
          [](double eps, const Vec3& z, const FieldSpec& k, int n) {
              CorrectorOptions opts;
              opts.n = n;
              return solve_corrector(eps, north_transport(UnitVec3(z)), k, opts);
          },
          py::arg("epsilon"), py::arg("center"), py::arg("field"), py::arg("n") = 256);
    m.def("reduced_energy",
          [](double eps, const Vec3& z, const FieldSpec& k, int n) {
              CorrectorOptions opts;
              opts.n = n;
              const ReducedEnergySample s = reduced_energy(eps, UnitVec3(z), k, opts);
              py::dict d;
              d["z"] = s.z;
              d["energy"] = s.energy;
              d["leading"] = s.leading;
              d["multiplier_norm"] = s.multiplier_norm;
              return d;
          },
          py::arg("epsilon"), py::arg("center"), py::arg("field"), py::arg("n") = 256);
    m.def("critical_search",
          [](double eps, const FieldSpec& k, int seeds, int n) {
              CorrectorOptions opts;
              opts.n = n;
              const SearchReport rep = critical_search(eps, k, fibonacci_sphere(seeds), opts);
              py::list sols;
              for (const SearchSolution& s : rep.solutions) {
                  py::dict d;
                  d["z"] = s.z;
                  d["classification"] = s.classification;
                  d["state"] = s.state;
                  sols.append(d);
              }
              py::dict out;
              out["solutions"] = sols;
              out["failed_seeds"] = rep.failed_seeds;
              out["degenerate_landscape"] = rep.degenerate_landscape;
              return out;
          },
          py::arg("epsilon"), py::arg("field"), py::arg("seeds") = 32, py::arg("n") = 256);

    m.def("cross_validate",
          [](const ReductionState& st, const FieldSpec& k) {
              const CrossValidation cv = cross_validate(st, k);
              py::dict d;
              d["period"] = cv.orbit.period;
              d["predicted_period"] = cv.predicted_period;
              d["period_rel_error"] = cv.period_rel_error;
              d["closure_error"] = cv.orbit.closure_error;
              d["aligned_distance"] = cv.aligned_distance;
              d["orbit"] = cv.orbit.samples;
              return d;
          },
          py::arg("state"), py::arg("field"),
          "close the physical orbit at speed 1/epsilon and compare");
}
