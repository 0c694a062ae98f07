#include "gkdv/pde.hpp"

#include <cmath>
#include <complex>

namespace gkdv {

using Complex = std::complex<double>;
using Eigen::VectorXcd;
using Eigen::VectorXd;

std::string to_string(Frame frame) { return frame == Frame::lab ? "lab" : "renormalized"; }

Frame frame_from_string(const std::string& name)
{
    if (name == "lab") return Frame::lab;
    if (name == "renormalized") return Frame::renormalized;
    throw std::invalid_argument("unknown frame '" + name + "'");
}

namespace {

// Highest retained bin under the 2/3 rule.
int retained_bins(int n) { return n / 3; }

double dealiased_wavenumber(const PeriodicGrid& grid) { return grid.wavenumber(retained_bins(grid.n)); }

// sign(w)|w|^p without pow
void apply_power(const VectorXd& w, int p, VectorXd& out)
{
    out.resize(w.size());
    for (Eigen::Index j = 0; j < w.size(); ++j) {
        const double x = w[j];
        double v = x;
        for (int k = 1; k < p; ++k) v *= x;
        out[j] = (p % 2 == 1) ? v : v * (x < 0 ? -1.0 : 1.0);
    }
}

}  // namespace

void SolverConfig::validate(const PeriodicGrid& grid) const
{
    if (p < 2) throw std::invalid_argument("solver: p must be at least 2");
    if (grid.n < 16 || (grid.n & (grid.n - 1))) throw std::invalid_argument("solver: N must be a power of two");
    if (grid.spacing() > 1.0 / 16 + 1e-15) throw std::invalid_argument("solver: grid spacing must be <= 1/16");
    if (!(dt > 0)) throw std::invalid_argument("solver: dt must be positive");
    if (contour_points < 8) throw std::invalid_argument("solver: need at least 8 contour points");
    if (!(callback_every > 0)) throw std::invalid_argument("solver: callback cadence must be positive");
    if (wrap_monitor && !(wrap_strip > 0 && wrap_strip < grid.half_length))
        throw std::invalid_argument("solver: wrap strip must be positive and shorter than half the domain");
    const double limit = max_stable_dt(grid, *this);
    if (dt > limit)
        throw std::invalid_argument("solver: dt = " + std::to_string(dt) + " exceeds the stability bound " +
                                    std::to_string(limit));
}

double max_stable_dt(const PeriodicGrid& grid, const SolverConfig& config)
{
    const double rate = dealiased_wavenumber(grid) * config.p * std::pow(config.amplitude_limit, config.p - 1);
    return config.stability_constant / rate;
}

InstabilityError::InstabilityError(double t, const std::string& what)
    : std::runtime_error(what + " at t = " + std::to_string(t)), time(t)
{
}

struct PdeSolver::Impl {
    PeriodicGrid grid;
    Frame frame;
    int p;
    double dt;
    RealFft fft;
    int kept;
    VectorXcd derivative;  // -i k on kept bins, 0 elsewhere
    VectorXcd E, E2, Q, f1, f2, f3;
    // scratch
    mutable VectorXd field, power;
    mutable VectorXcd transform;

    Impl(const PeriodicGrid& g, Frame fr, const SolverConfig& config)
        : grid(g), frame(fr), p(config.p), dt(config.dt), fft(g.n), kept(retained_bins(g.n))
    {
        const int bins = g.n / 2 + 1;
        derivative = VectorXcd::Zero(bins);
        E.resize(bins);
        E2.resize(bins);
        Q.resize(bins);
        f1.resize(bins);
        f2.resize(bins);
        f3.resize(bins);
        const int M = config.contour_points;
        for (int m = 0; m < bins; ++m) {
            const double k = g.wavenumber(m);
            if (m <= kept && m < g.n / 2) derivative[m] = Complex(0, -k);
            const double symbol = frame == Frame::lab ? k * k * k : k * k * k + k;
            const Complex c(0, symbol * dt);
            E[m] = std::exp(c);
            E2[m] = std::exp(c / 2.0);
            // Contour means avoid cancellation in the phi-functions near c = 0.
            Complex q = 0, a = 0, b = 0, d = 0;
            for (int j = 0; j < M; ++j) {
                const Complex r = c + std::exp(Complex(0, 2 * M_PI * (j + 0.5) / M));
                const Complex er = std::exp(r), r3 = r * r * r;
                q += (std::exp(r / 2.0) - 1.0) / r;
                a += (-4.0 - r + er * (4.0 - 3.0 * r + r * r)) / r3;
                b += (2.0 + r + er * (r - 2.0)) / r3;
                d += (-4.0 - 3.0 * r - r * r + er * (4.0 - r)) / r3;
            }
            Q[m] = dt * q / double(M);
            f1[m] = dt * a / double(M);
            f2[m] = dt * b / double(M);
            f3[m] = dt * d / double(M);
        }
    }

    VectorXcd nonlinear(const VectorXcd& v) const
    {
        fft.inverse(v, field);
        apply_power(field, p, power);
        fft.forward(power, transform);
        return derivative.cwiseProduct(transform);
    }
};

PdeSolver::PdeSolver(const PeriodicGrid& grid, Frame frame, const SolverConfig& config)
{
    config.validate(grid);
    impl_ = std::make_unique<Impl>(grid, frame, config);
}

PdeSolver::~PdeSolver() = default;
PdeSolver::PdeSolver(PdeSolver&&) noexcept = default;
PdeSolver& PdeSolver::operator=(PdeSolver&&) noexcept = default;

const PeriodicGrid& PdeSolver::grid() const { return impl_->grid; }
Frame PdeSolver::frame() const { return impl_->frame; }
double PdeSolver::dt() const { return impl_->dt; }
int PdeSolver::retained_modes() const { return impl_->kept; }

void PdeSolver::advance(VectorXcd& v) const
{
    const Impl& s = *impl_;
    const VectorXcd Nv = s.nonlinear(v);
    const VectorXcd a = s.E2.cwiseProduct(v) + s.Q.cwiseProduct(Nv);
    const VectorXcd Na = s.nonlinear(a);
    const VectorXcd b = s.E2.cwiseProduct(v) + s.Q.cwiseProduct(Na);
    const VectorXcd Nb = s.nonlinear(b);
    const VectorXcd c = s.E2.cwiseProduct(a) + s.Q.cwiseProduct(2.0 * Nb - Nv);
    const VectorXcd Nc = s.nonlinear(c);
    v = s.E.cwiseProduct(v) + s.f1.cwiseProduct(Nv) + 2.0 * s.f2.cwiseProduct(Na + Nb) + s.f3.cwiseProduct(Nc);
    v.tail(v.size() - s.kept - 1).setZero();
}

VectorXcd PdeSolver::to_spectrum(const VectorXd& w) const
{
    VectorXcd v;
    impl_->fft.forward(w, v);
    v.tail(v.size() - impl_->kept - 1).setZero();
    return v;
}

VectorXd PdeSolver::to_field(const VectorXcd& v) const
{
    VectorXd w;
    impl_->fft.inverse(v, w);
    return w;
}

double PdeSolver::tail_fraction(const VectorXcd& v) const
{
    // Bins m and n - m both carry |v_m|^2; the common factor cancels in the ratio.
    const int kept = impl_->kept;
    const int from = (2 * kept) / 3;
    double total = 0, tail = 0;
    for (int m = 0; m <= kept; ++m) {
        const double e = std::norm(v[m]) * (m == 0 ? 1 : 2);
        total += e;
        if (m > from) tail += e;
    }
    return total > 0 ? tail / total : 0;
}

double PdeSolver::dealias_band_norm(const VectorXcd& v) const
{
    return v.tail(v.size() - impl_->kept - 1).norm();
}

FieldState step(const FieldState& state, const SolverConfig& config)
{
    const PdeSolver solver(state.grid, state.frame, config);
    VectorXcd v = solver.to_spectrum(state.w);
    solver.advance(v);
    FieldState next = state;
    next.t = state.t + config.dt;
    next.w = solver.to_field(v);
    return next;
}

VectorXd reflect(const VectorXd& w)
{
    const Eigen::Index n = w.size();
    VectorXd out(n);
    out[0] = w[0];
    for (Eigen::Index j = 1; j < n; ++j) out[j] = w[n - j];
    return out;
}

namespace {

// Radiation travels left; after wrapping it re-enters at the right edge (the left edge when the
// run is time-reversed).
double strip_ratio(const FieldState& state, double strip, bool backward, double& amplitude)
{
    amplitude = state.w.cwiseAbs().maxCoeff();
    double edge = 0;
    for (int j = 0; j < state.grid.n; ++j) {
        const double y = state.grid.node(j);
        const bool in_strip = backward ? y < state.grid.left() + strip : y >= state.grid.right() - strip;
        if (in_strip) edge = std::max(edge, std::abs(state.w[j]));
    }
    return amplitude > 0 ? edge / amplitude : 0;
}

}  // namespace

EvolveSummary evolve(FieldState& state, double t_end, const SolverConfig& config, const StateCallback& callback)
{
    EvolveSummary summary;
    const double span = t_end - state.t;
    const bool backward = span < 0;
    if (span == 0) {
        if (callback) {
            callback(state);
            summary.callbacks = 1;
        }
        return summary;
    }
    const long steps = static_cast<long>(std::ceil(std::abs(span) / config.dt - 1e-9));
    SolverConfig stepping = config;
    stepping.dt = std::abs(span) / static_cast<double>(steps);
    const PdeSolver solver(state.grid, state.frame, stepping);
    summary.dt_used = stepping.dt;
    const long cadence = std::max<long>(1, std::lround(config.callback_every / stepping.dt));

    const double t_start = state.t;
    VectorXcd v = solver.to_spectrum(backward ? reflect(state.w) : state.w);
    FieldState view = state;
    auto publish = [&](long n) {
        view.t = t_start + (backward ? -1.0 : 1.0) * stepping.dt * static_cast<double>(n);
        if (n == steps) view.t = t_end;
        const VectorXd w = solver.to_field(v);
        view.w = backward ? reflect(w) : w;
    };
    auto check = [&] {
        const double tail = solver.tail_fraction(v);
        summary.max_tail_fraction = std::max(summary.max_tail_fraction, tail);
        if (!(tail <= config.spectral_tail_limit))
            throw InstabilityError(view.t, "spectral tail " + std::to_string(tail) + " above limit");
        double amplitude = 0;
        const double wrap = strip_ratio(view, config.wrap_strip, backward, amplitude);
        summary.max_amplitude = std::max(summary.max_amplitude, amplitude);
        if (!(amplitude <= config.amplitude_limit))
            throw InstabilityError(view.t, "amplitude " + std::to_string(amplitude) + " above limit");
        if (config.wrap_monitor) {
            summary.max_wrap_ratio = std::max(summary.max_wrap_ratio, wrap);
            if (wrap > config.wrap_limit)
                throw InstabilityError(view.t, "wrapped tail ratio " + std::to_string(wrap) + " above limit");
        }
    };

    publish(0);
    check();
    if (callback) {
        callback(view);
        ++summary.callbacks;
    }
    for (long n = 1; n <= steps; ++n) {
        solver.advance(v);
        ++summary.steps;
        if (n % cadence == 0 || n == steps) {
            publish(n);
            check();
            if (callback) {
                callback(view);
                ++summary.callbacks;
            }
        } else if (n % 64 == 0) {
            const double tail = solver.tail_fraction(v);
            summary.max_tail_fraction = std::max(summary.max_tail_fraction, tail);
            if (!(tail <= config.spectral_tail_limit)) {
                publish(n);
                throw InstabilityError(view.t, "spectral tail " + std::to_string(tail) + " above limit");
            }
        }
    }
    state = view;
    return summary;
}

Invariants invariants(const FieldState& state, int p)
{
    const SpectralDifferentiator D(state.grid);
    const VectorXd dw = D.derivative(state.w, 1);
    const double h = state.grid.spacing();
    double potential = 0;
    for (Eigen::Index j = 0; j < state.w.size(); ++j) potential += std::pow(std::abs(state.w[j]), p + 1);
    return {h * state.w.squaredNorm(), 0.5 * h * dw.squaredNorm() - h * potential / (p + 1)};
}

VectorXd spectral_shift(const PeriodicGrid& grid, const VectorXd& w, double offset)
{
    RealFft fft(grid.n);
    VectorXcd v;
    fft.forward(w, v);
    for (int m = 0; m < v.size(); ++m) v[m] *= std::exp(Complex(0, -grid.wavenumber(m) * offset));
    v[v.size() - 1] = v[v.size() - 1].real();  // Nyquist mode of a real field
    VectorXd out;
    fft.inverse(v, out);
    return out;
}

FieldState to_frame(const FieldState& state, Frame target)
{
    if (state.frame == target) return state;
    FieldState out = state;
    out.frame = target;
    // w(t, y) = u(t, y + t): shifting the lab profile left by t gives the renormalized one.
    const double offset = target == Frame::renormalized ? -state.t : state.t;
    out.w = spectral_shift(state.grid, state.w, offset);
    return out;
}

}  // namespace gkdv
