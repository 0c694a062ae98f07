#pragma once

#include "gkdv/spectral.hpp"

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>

namespace gkdv {

// renormalized: w_t + (w_yy - w + |w|^{p-1} w)_y = 0 with y = x - t.
// lab:          u_t + (u_xx + |u|^{p-1} u)_x = 0.
enum class Frame { renormalized = 0, lab = 1 };

std::string to_string(Frame frame);
Frame frame_from_string(const std::string& name);

struct FieldState {
    double t = 0;
    Frame frame = Frame::renormalized;
    PeriodicGrid grid;
    Eigen::VectorXd w;
};

struct SolverConfig {
    int p = 3;
    double dt = 0.005;
    int contour_points = 32;
    // dt * k_dealias * p * amplitude_limit^{p-1} must stay below stability_constant.
    double amplitude_limit = 1.6;
    double stability_constant = 2.0;
    double spectral_tail_limit = 1e-10;  // mass fraction in the upper third of the retained band
    // Right-edge strip where radiation re-enters after wrapping around the left boundary.
    bool wrap_monitor = true;
    double wrap_strip = 40;
    double wrap_limit = 1e-6;  // relative to max |w|
    double callback_every = 1.0;

    // Grid resolution (h <= 1/16), power of two, dt bound; throws std::invalid_argument.
    void validate(const PeriodicGrid& grid) const;
};

// Largest dt accepted by SolverConfig::validate on this grid.
double max_stable_dt(const PeriodicGrid& grid, const SolverConfig& config);

class InstabilityError : public std::runtime_error {
public:
    InstabilityError(double time, const std::string& what);
    double time;
};

// Exponential time differencing RK4 in Fourier space. The linear symbol is applied exactly
// (i(k^3 + k) renormalized, i k^3 lab); the nonlinearity is evaluated pointwise and
// differentiated spectrally, with modes above 2/3 of the Nyquist wavenumber removed.
class PdeSolver {
public:
    PdeSolver(const PeriodicGrid& grid, Frame frame, const SolverConfig& config);
    ~PdeSolver();
    PdeSolver(PdeSolver&&) noexcept;
    PdeSolver& operator=(PdeSolver&&) noexcept;

    const PeriodicGrid& grid() const;
    Frame frame() const;
    double dt() const;

    // In place; keeps the dealiased band at exactly zero.
    void advance(Eigen::VectorXcd& spectrum) const;
    Eigen::VectorXcd to_spectrum(const Eigen::VectorXd& w) const;  // dealiased
    Eigen::VectorXd to_field(const Eigen::VectorXcd& spectrum) const;
    double tail_fraction(const Eigen::VectorXcd& spectrum) const;
    double dealias_band_norm(const Eigen::VectorXcd& spectrum) const;
    int retained_modes() const;  // highest kept bin index

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// One step of size config.dt (the returned field is dealiased).
FieldState step(const FieldState& state, const SolverConfig& config);

struct EvolveSummary {
    long steps = 0;
    double dt_used = 0;
    double max_tail_fraction = 0;
    double max_wrap_ratio = 0;
    double max_amplitude = 0;
    int callbacks = 0;
};

using StateCallback = std::function<void(const FieldState&)>;

// Advances state to t_end. Backward runs (t_end < state.t) reflect (t, y) -> (-t, -y), evolve
// forward and reflect back; callbacks then see decreasing times. Steps are shortened uniformly
// so the run lands on t_end; callbacks fire at the start, every callback_every and at the end.
// Monitor failures throw InstabilityError carrying the failing time.
EvolveSummary evolve(FieldState& state, double t_end, const SolverConfig& config,
                     const StateCallback& callback = {});

struct Invariants {
    double mass = 0;    // int w^2
    double energy = 0;  // 1/2 int w_y^2 - 1/(p+1) int |w|^{p+1}
};

Invariants invariants(const FieldState& state, int p);

// w(y) -> w(2c - y) about the grid centre.
Eigen::VectorXd reflect(const Eigen::VectorXd& w);

// Maps between frames by the exact spectral shift y = x - t.
FieldState to_frame(const FieldState& state, Frame target);

// Shift a periodic field by `offset` (f(y) -> f(y - offset)) spectrally.
Eigen::VectorXd spectral_shift(const PeriodicGrid& grid, const Eigen::VectorXd& w, double offset);

}  // namespace gkdv
