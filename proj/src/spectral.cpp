#include "magsphere/spectral.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace magsphere {

namespace {

using MatL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

// Circulant matrix realizing the Fourier multiplier lambda(k); lam_cos[k]
// holds the (real, even) symbol for k = 0 .. n/2. Phases k*theta_m reduce
// exactly to grid indices (k*m mod n), so no rounding enters the argument
// of cos; the sums run in long double. The derivative kernels below use
// closed forms instead, since a growing symbol amplifies any sum noise.
MatL circulant_even(int n, const std::vector<double>& lam_cos) {
    const int half = n / 2;
    const long double pi = std::numbers::pi_v<long double>;
    std::vector<long double> ctab(n);
    for (int i = 0; i < n; ++i) ctab[i] = std::cos(2.0L * pi * i / n);
    std::vector<long double> col(n);
    for (int m = 0; m < n; ++m) {
        long double s = lam_cos[0];
        for (int k = 1; k < half; ++k)
            s += 2.0L * static_cast<long double>(lam_cos[k]) * ctab[(k * m) % n];
        s += static_cast<long double>(lam_cos[half]) * ctab[(half * m) % n];
        col[m] = s / n;
    }
    MatL mat(n, n);
    for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l) mat(j, l) = col[(j - l + n) % n];
    return mat;
}

}  // namespace

SpectralTable::SpectralTable(int n) : n_(n) {
    if (n < 32 || n % 2 != 0)
        throw std::invalid_argument("grid size must be even and at least 32");
    const int half = n / 2;
    theta_.resize(n);
    for (int k = 0; k < n; ++k) theta_[k] = 2.0 * std::numbers::pi * k / n;

    const long double pi = std::numbers::pi_v<long double>;

    {  // first derivative: odd symbol i k, Nyquist mode mapped to zero.
       // Closed-form kernel of the trigonometric interpolant's derivative.
        std::vector<long double> col(n);
        col[0] = 0.0L;
        for (int m = 1; m < n; ++m) {
            const long double x = pi * m / n;
            col[m] = (m % 2 == 0 ? 0.5L : -0.5L) * std::cos(x) / std::sin(x);
        }
        d1l_.resize(n, n);
        for (int j = 0; j < n; ++j)
            for (int l = 0; l < n; ++l) d1l_(j, l) = col[(j - l + n) % n];
        d1_ = d1l_.cast<double>();
    }

    {  // second derivative: symbol -k^2 through the Nyquist mode.
        std::vector<long double> col(n);
        col[0] = -static_cast<long double>(n) * n / 12.0L - 1.0L / 6.0L;
        for (int m = 1; m < n; ++m) {
            const long double s = std::sin(pi * m / n);
            col[m] = (m % 2 == 0 ? -0.5L : 0.5L) / (s * s);
        }
        d2l_.resize(n, n);
        for (int j = 0; j < n; ++j)
            for (int l = 0; l < n; ++l) d2l_(j, l) = col[(j - l + n) % n];
        d2_ = d2l_.cast<double>();
    }

    std::vector<double> lam(half + 1);

    lam[0] = 0.0;
    for (int k = 1; k <= half; ++k) lam[k] = 1.0 / (double(k) * double(k));
    inv_neg_d2_l_ = circulant_even(n_, lam);
    inv_neg_d2_ = inv_neg_d2_l_.cast<double>();

    lam[0] = -1.0;
    lam[1] = 0.0;
    for (int k = 2; k <= half; ++k) lam[k] = 1.0 / (double(k) * double(k) - 1.0);
    inv_neg_d2_minus_id_l_ = circulant_even(n_, lam);
    inv_neg_d2_minus_id_ = inv_neg_d2_minus_id_l_.cast<double>();
}

GridFun SpectralTable::apply_d1(const GridFun& f) const {
    return (d1l_ * f.cast<long double>()).cast<double>();
}

GridFun SpectralTable::apply_d2(const GridFun& f) const {
    return (d2l_ * f.cast<long double>()).cast<double>();
}

GridFun SpectralTable::apply_inv_neg_d2(const GridFun& f) const {
    return (inv_neg_d2_l_ * f.cast<long double>()).cast<double>();
}

GridFun SpectralTable::apply_inv_neg_d2_minus_id(const GridFun& f) const {
    return (inv_neg_d2_minus_id_l_ * f.cast<long double>()).cast<double>();
}

const SpectralTable& SpectralTable::get(int n) {
    static std::mutex mu;
    static std::map<int, std::unique_ptr<SpectralTable>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end())
        it = cache.emplace(n, std::unique_ptr<SpectralTable>(new SpectralTable(n))).first;
    return *it->second;
}

FourierSeries::FourierSeries(const GridFun& samples) : n_(int(samples.size())) {
    if (n_ < 2 || n_ % 2 != 0)
        throw std::invalid_argument("need an even number of samples");
    const int half = n_ / 2;
    coeff_.resize(half + 1);
    for (int k = 0; k <= half; ++k) {
        std::complex<double> c(0.0, 0.0);
        for (int l = 0; l < n_; ++l) {
            const double a = 2.0 * std::numbers::pi * k * l / n_;
            c += samples[l] * std::complex<double>(std::cos(a), -std::sin(a));
        }
        coeff_[k] = c / double(n_);
    }
    coeff_[half].imag(0.0);  // Nyquist coefficient is real for real data
}

double FourierSeries::eval(double theta) const {
    const int half = n_ / 2;
    double s = coeff_[0].real();
    for (int k = 1; k < half; ++k)
        s += 2.0 * (coeff_[k].real() * std::cos(k * theta) - coeff_[k].imag() * std::sin(k * theta));
    s += coeff_[half].real() * std::cos(half * theta);
    return s;
}

}  // namespace magsphere
