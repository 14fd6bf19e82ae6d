#pragma once

#include <string>
#include <vector>

#include "magsphere/spectral.hpp"
#include "magsphere/sphere.hpp"

namespace magsphere {

// Closed curve on the sphere, sampled at theta_k = 2 pi k / N with N even
// and N >= 32. Immutable after construction; samples are renormalized onto
// the sphere (inputs further than 1e-9 from it are rejected as corrupt).
class Loop {
  public:
    explicit Loop(std::vector<Vec3> samples);

    int size() const { return int(samples_.size()); }
    double theta(int k) const;
    const std::vector<Vec3>& samples() const { return samples_; }
    const Vec3& operator[](int k) const { return samples_[k]; }

    Eigen::MatrixX3d matrix() const;

  private:
    std::vector<Vec3> samples_;
};

// Vector field along a loop, tangent to the sphere at every sample. The
// constructor strips radial leaks up to 1e-6 and rejects anything larger.
struct TangentLoopField {
    TangentLoopField(Loop base_, std::vector<Vec3> values_);
    Loop base;
    std::vector<Vec3> values;
};

// Coefficients of a tangent field on the pointwise frame {u', u ^ u'}.
struct FrameCoeffs {
    GridFun g1, g2;
};

Loop great_circle(const Rotation3& r, int n);

// Spectral derivative of the sampled curve; order 1 or 2. Exact for
// band-limited curves with bandwidth below N/2.
std::vector<Vec3> derivative(const Loop& u, int order);

// Quadratic-mean speed (integral-average of |u'|^2, square-rooted); for the
// curves produced by the solver |u'| is constant and this is that constant.
double length_functional(const Loop& u);

// Signed geodesic curvature at every sample: u'' . (u ^ u') / |u'|^3.
GridFun geodesic_curvature(const Loop& u);

FrameCoeffs frame_decompose(const Loop& u, const TangentLoopField& phi);
TangentLoopField frame_compose(const Loop& u, const FrameCoeffs& g);

struct AlignResult {
    double distance;  // sup over samples after the best phase shift
    double phase;
};

// min over phase shifts of sup_k |u(theta_k + phase) - v(theta_k)|, with u
// evaluated through its trigonometric interpolant. Orientation is not
// quotiented: curves traversed opposite ways stay far apart.
AlignResult phase_align_distance(const Loop& u, const Loop& v);

// True when no two samples at circular index distance > N/16 come within
// 1e-4 of each other.
bool is_embedded(const Loop& u);

Loop reversed(const Loop& u);
Loop rotated(const Rotation3& r, const Loop& u);

// CSV with header "theta,x,y,z", one row per sample, 17 significant digits.
void loop_to_csv(const Loop& u, const std::string& path);
Loop loop_from_csv(const std::string& path);

}  // namespace magsphere
