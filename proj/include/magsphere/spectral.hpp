#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace magsphere {

// Samples of one period-2pi scalar on the uniform grid theta_k = 2 pi k / N.
using GridFun = Eigen::VectorXd;

// Dense Fourier-multiplier operators on the uniform periodic grid, built once
// per grid size and cached. All four matrices are circulant realizations of
// diagonal Fourier symbols, so they commute and invert each other exactly:
//   inv_neg_d2 * (-d2)           == identity minus the mean mode
//   inv_neg_d2_minus_id * (-d2 - I) == identity minus the |k| = 1 modes
// (to roundoff, for every grid function, band-limited or not).
class SpectralTable {
  public:
    static const SpectralTable& get(int n);

    int size() const { return n_; }
    double theta(int k) const { return theta_[k]; }
    const std::vector<double>& thetas() const { return theta_; }

    const Eigen::MatrixXd& d1() const { return d1_; }
    const Eigen::MatrixXd& d2() const { return d2_; }
    // Solves -g'' = r on mean-free data; annihilates the constant mode.
    const Eigen::MatrixXd& inv_neg_d2() const { return inv_neg_d2_; }
    // Solves -g'' - g = r away from the cos/sin modes; annihilates them.
    const Eigen::MatrixXd& inv_neg_d2_minus_id() const { return inv_neg_d2_minus_id_; }

    // Extended-precision applications. A plain double matvec leaves white
    // noise of order sqrt(n) * eps in the result samples, and the second
    // derivative amplifies sample noise by (n/2)^2; at n = 256 the combined
    // floor reaches 1e-10, exactly at the solver tolerances. Inputs are
    // still double samples, so the attainable floor for apply_d2 is the
    // amplified rounding of the input itself, near 2e-11 at n = 256.
    GridFun apply_d1(const GridFun& f) const;
    GridFun apply_d2(const GridFun& f) const;
    GridFun apply_inv_neg_d2(const GridFun& f) const;
    GridFun apply_inv_neg_d2_minus_id(const GridFun& f) const;

  private:
    using MatL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

    explicit SpectralTable(int n);

    int n_;
    std::vector<double> theta_;
    Eigen::MatrixXd d1_, d2_, inv_neg_d2_, inv_neg_d2_minus_id_;
    MatL d1l_, d2l_, inv_neg_d2_l_, inv_neg_d2_minus_id_l_;
};

// Trigonometric interpolant of uniformly sampled real data; evaluates the
// sampled function (and shifts of it) at arbitrary parameters.
class FourierSeries {
  public:
    explicit FourierSeries(const GridFun& samples);
    double eval(double theta) const;
    int size() const { return n_; }

  private:
    int n_;
    std::vector<std::complex<double>> coeff_;  // k = 0 .. n/2
};

}  // namespace magsphere
