#pragma once

#include <Eigen/Dense>
#include <complex>
#include <memory>

namespace gkdv {

using ComplexVector = Eigen::VectorXcd;

// Real-to-complex FFT of fixed length backed by FFTW (estimate-mode plans, so results are
// reproducible run to run). inverse() includes the 1/n normalization.
class RealFft {
public:
    explicit RealFft(int n);
    ~RealFft();
    RealFft(const RealFft&) = delete;
    RealFft& operator=(const RealFft&) = delete;
    RealFft(RealFft&&) noexcept;
    RealFft& operator=(RealFft&&) noexcept;

    int size() const { return n_; }
    int bins() const { return n_ / 2 + 1; }
    void forward(const Eigen::VectorXd& in, ComplexVector& out) const;
    void inverse(const ComplexVector& in, Eigen::VectorXd& out) const;

private:
    struct Plans;
    int n_;
    std::unique_ptr<Plans> plans_;
};

// Uniform periodic grid on [c - L, c + L), nodes y_j = c - L + j h.
struct PeriodicGrid {
    double half_length = 256.0;
    int n = 8192;
    double center = 0.0;

    static PeriodicGrid make(double half_length, int n, double center = 0.0);
    double spacing() const { return 2 * half_length / n; }
    double node(int j) const { return center - half_length + j * spacing(); }
    double left() const { return center - half_length; }
    double right() const { return center + half_length; }
    double wavenumber(int k) const { return M_PI * k / half_length; }  // k = 0 .. n/2
    Eigen::VectorXd wavenumbers() const;
    template <typename F>
    Eigen::VectorXd sample(F&& f) const
    {
        Eigen::VectorXd out(n);
        for (int j = 0; j < n; ++j) out[j] = f(node(j));
        return out;
    }
    double dot(const Eigen::VectorXd& f, const Eigen::VectorXd& g) const { return spacing() * f.dot(g); }
    double norm(const Eigen::VectorXd& f) const { return std::sqrt(dot(f, f)); }
};

// Spectral differentiation on a periodic grid; the Nyquist bin of odd derivatives is zeroed.
class SpectralDifferentiator {
public:
    explicit SpectralDifferentiator(PeriodicGrid grid);

    const PeriodicGrid& grid() const { return grid_; }
    Eigen::VectorXd derivative(const Eigen::VectorXd& f, int order = 1) const;
    double h1_norm(const Eigen::VectorXd& f) const;
    // L2 norm of the part of f with |k| >= fraction * k_Nyquist.
    double band_norm(const Eigen::VectorXd& f, double fraction) const;

private:
    PeriodicGrid grid_;
    std::shared_ptr<RealFft> fft_;
    Eigen::VectorXd k_;
};

}  // namespace gkdv
