#pragma once

#include "gkdv/ansatz.hpp"
#include "gkdv/pde.hpp"
#include "gkdv/reduced.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gkdv {

// phi(y) = (2/pi) arctan(e^{8 rho y}), evaluated as 1/2 + atan(sinh(8 rho y)) / pi so that
// phi(-y) = 1 - phi(y) holds to one rounding.
struct EnergyWeights {
    double rho = 1.0 / 32;

    double phi(double y) const;
    double phi_d1(double y) const;
    double phi_d2(double y) const;
    double phi_d3(double y) const;
    // phi / (1+mu1)^2 + (1-phi) / (1+mu2)^2
    double Phi1(double y, double mu1, double mu2) const;
    // mu1 phi / (1+mu1)^2 + mu2 (1-phi) / (1+mu2)^2
    double Phi2(double y, double mu1, double mu2) const;
};

// int [ (eps_y^2 + eps^2 - 2/(p+1) (|eps+V|^{p+1} - |V|^{p+1} - (p+1)|V|^{p-1} V eps)) Phi1 + eps^2 Phi2 ] dy
double energy_functional(const PeriodicGrid& grid, const Eigen::VectorXd& eps, const Eigen::VectorXd& eps_y,
                         const Eigen::VectorXd& V, double mu1, double mu2, int p, const EnergyWeights& weights = {});

struct DecomposeOptions {
    int max_iterations = 25;
    // Orthogonality target |<eps, B>| <= tolerance |eps| |B| for B in {R1, R1', R2, R2'}; a round-off
    // floor of 1e-13 |w| |B| applies when eps itself vanishes.
    double tolerance = 1e-9;
    double trust_radius = 0.3;  // H1 distance between w and V(guess)
    double min_separation = 6;
    // Extra Newton starts with z1, z2 moved by +-probe_shift; a different limit is an ambiguity.
    int uniqueness_probes = 0;
    double probe_shift = 0.25;
    AnsatzOptions ansatz;
};

struct Decomposition {
    ModParams gamma;
    int field_sign = 1;  // the decomposed field is field_sign * w
    Eigen::VectorXd eps;
    double eps_l2 = 0, eps_h1 = 0;
    // <eps, B_i> / (|eps| |B_i|), B = (R1, R1', R2, R2'); zero when eps vanishes.
    Eigen::Vector4d orthogonality = Eigen::Vector4d::Zero();
    std::vector<double> residual_history;  // max_i |<eps, B_i>| / |B_i| per iterate, starting at the guess
    int iterations = 0;
    // Supercritical only: <eps, Z~^{+-}_k>, Z~_k = Z_{1+mu_k}(y - z_k).
    std::optional<Eigen::Vector2d> a_plus, a_minus;
    double energy = 0;
};

class DecompositionError : public std::runtime_error {
public:
    DecompositionError(const std::string& what, double last_residual, int iterations);
    double last_residual;
    int iterations;
};

class AmbiguousDecomposition : public std::runtime_error {
public:
    AmbiguousDecomposition(const ModParams& first, const ModParams& second);
    ModParams first, second;
};

struct ColdStart {
    ModParams gamma;
    int field_sign = 1;
};

// Two largest local maxima of |w| give z1 > z2; mu_k from (|w(z_k)| / Q(0))^{p-1} - 1. Throws if
// sign(w(z2)) does not match sigma sign(w(z1)).
ColdStart cold_start_guess(const PeriodicGrid& grid, const Eigen::VectorXd& w, const ProfileSet& profiles);

// Newton on the four orthogonality conditions with the analytic Jacobian. Grid, profiles and the
// FFT plan are kept between calls.
class Modulator {
public:
    Modulator(const PeriodicGrid& grid, const ProfileSet& profiles, const DecomposeOptions& options = {});
    ~Modulator();
    Modulator(Modulator&&) noexcept;
    Modulator& operator=(Modulator&&) noexcept;

    const PeriodicGrid& grid() const;
    const DecomposeOptions& options() const;

    // w must be sampled on grid(). field_sign flips w before decomposing.
    Decomposition decompose(const Eigen::VectorXd& w, const ModParams& guess, int field_sign = 1) const;
    Decomposition decompose_cold(const Eigen::VectorXd& w) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

Decomposition decompose(const PeriodicGrid& grid, const Eigen::VectorXd& w, const ModParams& guess,
                        const ProfileSet& profiles, const DecomposeOptions& options = {});

struct TrackRow {
    double t = 0;
    ModParams gamma;
    double eps_l2 = 0, eps_h1 = 0;
    double energy = 0;
    std::optional<Eigen::Vector2d> a_plus, a_minus;
    int iterations = 0;
    std::string tube_flags;
    bool inside_tube = true;
};

struct TrackerOptions {
    DecomposeOptions decompose;
    // Tube bounds are widened by this factor (slack tube_scale - 1 in check_tube).
    double tube_scale = 2;
    bool check_eps_bound = false;  // include the remainder bound among the predicates
    bool stop_on_tube_exit = true;
};

class TubeExit : public std::runtime_error {
public:
    TubeExit(double time, const std::string& flags);
    double time;
    std::string flags;
};

// Warm-started decompositions along a run (renormalized or lab states; lab states are shifted).
class Tracker {
public:
    Tracker(const ProfileSet& profiles, const TrackerOptions& options = {});
    ~Tracker();
    Tracker(Tracker&&) noexcept;
    Tracker& operator=(Tracker&&) noexcept;

    // Cold start on the first call unless a guess was seeded. The row is stored before a TubeExit
    // is thrown.
    const TrackRow& observe(const FieldState& state);
    void seed(const ModParams& guess, int field_sign = 1);
    const std::vector<TrackRow>& rows() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

inline constexpr const char* kTrackCsvHeader =
    "t,mu1,mu2,z1,z2,z,zbar,mu,mubar,eps_l2,eps_h1,W,aplus1,aplus2,aminus1,aminus2";

void write_track_csv(std::span<const TrackRow> rows, const std::filesystem::path& path);
std::vector<TrackRow> read_track_csv(const std::filesystem::path& path);

struct LogLawFit {
    double t_from = 0, t_to = 0;
    int samples = 0;
    // e^{z/2} ~ c t + b
    double c_fit = 0, intercept = 0;
    double c_through_origin = 0;  // e^{z/2} ~ c t
    double alpha_fit = 0;         // c_fit^2
    double relative_error = 0;    // |c_fit - sqrt(alpha)| / sqrt(alpha)
    double relative_error_through_origin = 0;
    double rms_residual = 0;
    std::vector<double> residuals;  // e^{z/2} - (c t + b) per sample
};

// Least squares over samples with t in [t_from, t_to]. Needs at least 50 samples and strictly
// increasing z there (std::invalid_argument otherwise).
LogLawFit fit_log_law(std::span<const double> t, std::span<const double> z, double t_from, double t_to, double alpha);

}  // namespace gkdv
