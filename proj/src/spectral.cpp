#include "gkdv/spectral.hpp"

#include <fftw3.h>
#include <cmath>
#include <stdexcept>

namespace gkdv {

struct RealFft::Plans {
    fftw_plan forward = nullptr;
    fftw_plan inverse = nullptr;
    double* real = nullptr;
    fftw_complex* spec = nullptr;

    ~Plans()
    {
        if (forward) fftw_destroy_plan(forward);
        if (inverse) fftw_destroy_plan(inverse);
        fftw_free(real);
        fftw_free(spec);
    }
};

RealFft::RealFft(int n) : n_(n), plans_(std::make_unique<Plans>())
{
    if (n < 2 || (n & (n - 1))) throw std::invalid_argument("RealFft: n must be a power of two");
    plans_->real = fftw_alloc_real(n);
    plans_->spec = fftw_alloc_complex(n / 2 + 1);
    plans_->forward = fftw_plan_dft_r2c_1d(n, plans_->real, plans_->spec, FFTW_ESTIMATE);
    plans_->inverse = fftw_plan_dft_c2r_1d(n, plans_->spec, plans_->real, FFTW_ESTIMATE);
}

RealFft::~RealFft() = default;
RealFft::RealFft(RealFft&&) noexcept = default;
RealFft& RealFft::operator=(RealFft&&) noexcept = default;

void RealFft::forward(const Eigen::VectorXd& in, ComplexVector& out) const
{
    if (in.size() != n_) throw std::invalid_argument("RealFft::forward: size mismatch");
    std::copy(in.data(), in.data() + n_, plans_->real);
    fftw_execute(plans_->forward);
    out.resize(bins());
    auto* s = reinterpret_cast<std::complex<double>*>(plans_->spec);
    std::copy(s, s + bins(), out.data());
}

void RealFft::inverse(const ComplexVector& in, Eigen::VectorXd& out) const
{
    if (in.size() != bins()) throw std::invalid_argument("RealFft::inverse: size mismatch");
    auto* s = reinterpret_cast<std::complex<double>*>(plans_->spec);
    std::copy(in.data(), in.data() + bins(), s);
    fftw_execute(plans_->inverse);  // c2r destroys its input; the buffer is ours
    out.resize(n_);
    const double scale = 1.0 / n_;
    for (int j = 0; j < n_; ++j) out[j] = plans_->real[j] * scale;
}

PeriodicGrid PeriodicGrid::make(double half_length, int n, double center)
{
    if (!(half_length > 0)) throw std::invalid_argument("PeriodicGrid: half length must be positive");
    if (n < 16 || (n & (n - 1))) throw std::invalid_argument("PeriodicGrid: n must be a power of two >= 16");
    return PeriodicGrid{half_length, n, center};
}

Eigen::VectorXd PeriodicGrid::wavenumbers() const
{
    Eigen::VectorXd k(n / 2 + 1);
    for (int i = 0; i <= n / 2; ++i) k[i] = wavenumber(i);
    return k;
}

SpectralDifferentiator::SpectralDifferentiator(PeriodicGrid grid)
    : grid_(grid), fft_(std::make_shared<RealFft>(grid.n)), k_(grid.wavenumbers())
{
}

Eigen::VectorXd SpectralDifferentiator::derivative(const Eigen::VectorXd& f, int order) const
{
    ComplexVector s;
    fft_->forward(f, s);
    const std::complex<double> I(0, 1);
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        std::complex<double> m = 1;
        for (int o = 0; o < order; ++o) m *= I * k_[i];
        s[i] *= m;
    }
    if (order % 2) s[s.size() - 1] = 0;
    Eigen::VectorXd out;
    fft_->inverse(s, out);
    return out;
}

double SpectralDifferentiator::h1_norm(const Eigen::VectorXd& f) const
{
    const Eigen::VectorXd d = derivative(f, 1);
    return std::sqrt(grid_.dot(f, f) + grid_.dot(d, d));
}

double SpectralDifferentiator::band_norm(const Eigen::VectorXd& f, double fraction) const
{
    ComplexVector s;
    fft_->forward(f, s);
    const int n = grid_.n;
    const int first = static_cast<int>(std::ceil(fraction * (n / 2)));
    double sum = 0;
    for (int k = std::max(first, 0); k <= n / 2; ++k) sum += (k == 0 || k == n / 2 ? 1.0 : 2.0) * std::norm(s[k]);
    return std::sqrt(grid_.spacing() / n * sum);
}

}  // namespace gkdv
