#include "magsphere/loop.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "magsphere/errors.hpp"

namespace magsphere {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Eigen::MatrixX3d to_matrix(const std::vector<Vec3>& v) {
    Eigen::MatrixX3d m(v.size(), 3);
    for (size_t k = 0; k < v.size(); ++k) m.row(k) = v[k];
    return m;
}

std::vector<Vec3> to_vectors(const Eigen::MatrixX3d& m) {
    std::vector<Vec3> v(m.rows());
    for (Eigen::Index k = 0; k < m.rows(); ++k) v[k] = m.row(k);
    return v;
}

}  // namespace

Loop::Loop(std::vector<Vec3> samples) : samples_(std::move(samples)) {
    const int n = int(samples_.size());
    if (n < 32 || n % 2 != 0)
        throw std::invalid_argument("loop needs an even sample count of at least 32");
    for (auto& s : samples_) {
        const double norm = s.norm();
        if (std::abs(norm - 1.0) > 1e-9)
            throw std::invalid_argument("loop sample is not on the unit sphere");
        s /= norm;
    }
}

double Loop::theta(int k) const { return kTwoPi * k / size(); }

Eigen::MatrixX3d Loop::matrix() const { return to_matrix(samples_); }

TangentLoopField::TangentLoopField(Loop base_, std::vector<Vec3> values_)
    : base(std::move(base_)), values(std::move(values_)) {
    if (int(values.size()) != base.size())
        throw InvalidBaseError("tangent field size does not match its base loop");
    for (int k = 0; k < base.size(); ++k) {
        const double radial = values[k].dot(base[k]);
        if (std::abs(radial) > 1e-6 * std::max(1.0, values[k].norm()))
            throw ProjectionViolationError("field is not tangent to the sphere along the loop");
        values[k] -= radial * base[k];
    }
}

Loop great_circle(const Rotation3& r, int n) {
    std::vector<Vec3> s(n);
    for (int k = 0; k < n; ++k) {
        const double th = kTwoPi * k / n;
        s[k] = r * Vec3(std::cos(th), std::sin(th), 0.0);
    }
    return Loop(std::move(s));
}

std::vector<Vec3> derivative(const Loop& u, int order) {
    if (order != 1 && order != 2) throw std::invalid_argument("derivative order must be 1 or 2");
    const auto& tab = SpectralTable::get(u.size());
    Eigen::MatrixX3d d(u.size(), 3);
    for (int c = 0; c < 3; ++c)
        d.col(c) = order == 1 ? tab.apply_d1(u.matrix().col(c)) : tab.apply_d2(u.matrix().col(c));
    return to_vectors(d);
}

double length_functional(const Loop& u) {
    double max_sep = 0.0;
    for (int k = 0; k < u.size(); ++k)
        max_sep = std::max(max_sep, (u[k] - u[0]).norm());
    if (max_sep < 1e-10) throw DegenerateCurveError("loop has collapsed to a point");
    const auto du = derivative(u, 1);
    double s = 0.0;
    for (const auto& d : du) s += d.squaredNorm();
    return std::sqrt(s / u.size());
}

GridFun geodesic_curvature(const Loop& u) {
    const auto du = derivative(u, 1);
    const auto ddu = derivative(u, 2);
    GridFun kappa(u.size());
    for (int k = 0; k < u.size(); ++k) {
        const double sp = du[k].norm();
        if (sp < 1e-8) throw IrregularCurveError("loop has a vanishing tangent");
        kappa[k] = ddu[k].dot(u[k].cross(du[k])) / (sp * sp * sp);
    }
    return kappa;
}

FrameCoeffs frame_decompose(const Loop& u, const TangentLoopField& phi) {
    if (phi.base.size() != u.size())
        throw InvalidBaseError("field base does not match the loop");
    for (int k = 0; k < u.size(); ++k)
        if ((phi.base[k] - u[k]).norm() > 1e-12)
            throw InvalidBaseError("field base does not match the loop");
    const auto du = derivative(u, 1);
    FrameCoeffs g{GridFun(u.size()), GridFun(u.size())};
    for (int k = 0; k < u.size(); ++k) {
        const double s2 = du[k].squaredNorm();
        if (s2 < 1e-16) throw IrregularCurveError("loop has a vanishing tangent");
        g.g1[k] = phi.values[k].dot(du[k]) / s2;
        g.g2[k] = phi.values[k].dot(u[k].cross(du[k])) / s2;
    }
    return g;
}

TangentLoopField frame_compose(const Loop& u, const FrameCoeffs& g) {
    if (g.g1.size() != u.size() || g.g2.size() != u.size())
        throw InvalidBaseError("frame coefficient size does not match the loop");
    const auto du = derivative(u, 1);
    std::vector<Vec3> vals(u.size());
    for (int k = 0; k < u.size(); ++k)
        vals[k] = g.g1[k] * du[k] + g.g2[k] * u[k].cross(du[k]);
    return TangentLoopField(u, std::move(vals));
}

AlignResult phase_align_distance(const Loop& u, const Loop& v) {
    if (u.size() != v.size())
        throw std::invalid_argument("phase alignment needs equal sample counts");
    const int n = u.size();
    const int refine = 4;
    const int m = refine * n;

    // u on the m-point grid; shifted-grid samples of u are exactly these.
    std::vector<FourierSeries> series;
    series.reserve(3);
    Eigen::MatrixX3d mu = u.matrix();
    for (int c = 0; c < 3; ++c) series.emplace_back(GridFun(mu.col(c)));
    std::vector<Vec3> fine(m);
    for (int j = 0; j < m; ++j) {
        const double th = kTwoPi * j / m;
        fine[j] = Vec3(series[0].eval(th), series[1].eval(th), series[2].eval(th));
    }

    auto dist_at = [&](double phase) {
        double d = 0.0;
        for (int k = 0; k < n; ++k) {
            const double th = kTwoPi * k / n + phase;
            const Vec3 up(series[0].eval(th), series[1].eval(th), series[2].eval(th));
            d = std::max(d, (up - v[k]).norm());
        }
        return d;
    };

    int best_j = 0;
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < m; ++j) {
        double d = 0.0;
        for (int k = 0; k < n; ++k) {
            d = std::max(d, (fine[(refine * k + j) % m] - v[k]).norm());
            if (d >= best) break;
        }
        if (d < best) {
            best = d;
            best_j = j;
        }
    }

    // Golden-section refinement around the best grid phase.
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = kTwoPi * best_j / m - kTwoPi / m;
    double hi = kTwoPi * best_j / m + kTwoPi / m;
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = dist_at(x1), f2 = dist_at(x2);
    for (int it = 0; it < 48; ++it) {
        if (f1 < f2) {
            hi = x2; x2 = x1; f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = dist_at(x1);
        } else {
            lo = x1; x1 = x2; f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = dist_at(x2);
        }
    }
    const double phase = f1 < f2 ? x1 : x2;
    const double dist = std::min(std::min(f1, f2), best);
    const double best_phase = std::min(f1, f2) < best ? phase : kTwoPi * best_j / m;
    return {dist, std::fmod(best_phase + kTwoPi, kTwoPi)};
}

bool is_embedded(const Loop& u) {
    const int n = u.size();
    const int guard = n / 16;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const int sep = std::min(j - i, n - (j - i));
            if (sep <= guard) continue;
            if ((u[i] - u[j]).norm() <= 1e-4) return false;
        }
    return true;
}

Loop reversed(const Loop& u) {
    std::vector<Vec3> s(u.size());
    for (int k = 0; k < u.size(); ++k) s[k] = u[(u.size() - k) % u.size()];
    return Loop(std::move(s));
}

Loop rotated(const Rotation3& r, const Loop& u) {
    std::vector<Vec3> s(u.size());
    for (int k = 0; k < u.size(); ++k) s[k] = r * u[k];
    return Loop(std::move(s));
}

void loop_to_csv(const Loop& u, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open " + path + " for writing");
    out << "theta,x,y,z\n";
    char buf[160];
    for (int k = 0; k < u.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", u.theta(k), u[k].x(),
                      u[k].y(), u[k].z());
        out << buf;
    }
    if (!out) throw ConfigError("failed writing " + path);
}

Loop loop_from_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || (line != "theta,x,y,z" && line != "theta,x,y,z\r"))
        throw ConfigError("loop file must start with the header theta,x,y,z");
    std::vector<Vec3> samples;
    std::vector<double> thetas;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        double vals[4];
        char sep;
        for (int c = 0; c < 4; ++c) {
            if (!(row >> vals[c])) throw ConfigError("malformed loop row: " + line);
            if (c < 3 && !(row >> sep && sep == ',')) throw ConfigError("malformed loop row: " + line);
        }
        thetas.push_back(vals[0]);
        samples.emplace_back(vals[1], vals[2], vals[3]);
    }
    const int n = int(samples.size());
    if (n < 32 || n % 2 != 0)
        throw ConfigError("loop file needs an even number of samples, at least 32");
    for (int k = 0; k < n; ++k)
        if (std::abs(thetas[k] - kTwoPi * k / n) > 1e-9)
            throw ConfigError("loop parameter column is not the uniform grid");
    try {
        return Loop(std::move(samples));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("invalid loop data: ") + e.what());
    }
}

}  // namespace magsphere
