#pragma once

#include "gkdv/linearized.hpp"
#include "gkdv/spectral.hpp"

#include <limits>

namespace gkdv {

// Modulation parameters of the two bubbles.
struct ModParams {
    double mu1 = 0, mu2 = 0, z1 = 0, z2 = 0;

    double z() const { return z1 - z2; }
    double zbar() const { return z1 + z2; }
    double mu() const { return mu1 - mu2; }
    double mubar() const { return mu1 + mu2; }
    // |mubar| <= e^{-9z/16} and |zbar| <= e^{-z/32}
    bool admissible() const;
};

// Time derivatives of the modulation parameters.
struct ModRates {
    double mu1 = 0, mu2 = 0, z1 = 0, z2 = 0;
};

// Rates with the leading-order flow vectors set to zero.
ModRates formal_flow(const ModParams& gamma, const ProfileSet& profiles);

// Symmetric data on the formal-flow curve: mu = 2 sqrt(alpha) e^{-z/2}, mubar = zbar = 0.
ModParams symmetric_params(double z, double alpha);

// Master cutoff psi: 0 on (-inf, 0], 1 on [1/2, inf), psi(x) = S(2x) with S the normalized
// integral of exp(-1/(u(1-u))). Values come from a Hermite table of S.
class BumpCutoff {
public:
    static const BumpCutoff& instance();
    double value(double x) const;
    double derivative(double x, int order) const;  // order 1..3

private:
    BumpCutoff();
    int cells_;
    Eigen::VectorXd table_;  // S at u = k / cells_
    double normalizer_;
};

// phi(y) = psi(y / scale + 1). The natural scale is e^{z/2}; `scale_limit` clamps it so the
// transition fits a finite periodic domain (then phi no longer moves with z).
struct CutoffField {
    double scale = 1;
    bool clamped = false;
    Eigen::VectorXd phi, d1, d2, d3;
    Eigen::VectorXd tilde;  // psi'(y / scale + 1)
    Eigen::VectorXd dz;     // d phi / d z; d/dz1 = dz, d/dz2 = -dz
};

CutoffField build_cutoff(double z, const PeriodicGrid& grid,
                         double scale_limit = std::numeric_limits<double>::infinity());

struct AnsatzOptions {
    bool with_correction = true;  // false drops r (r = 0)
    double cutoff_scale_limit = std::numeric_limits<double>::infinity();
};

// V = R1 + sigma R2 + r phi with R_k = Q_{1+mu_k}(y - z_k), r = e^{-z}(A_1(y-z1) + A_2(y-z2)).
struct AnsatzField {
    ModParams gamma;
    int sigma = 0;
    Eigen::VectorXd R1, R2;  // unsigned bubbles
    Eigen::VectorXd r, rtilde, V;
    CutoffField cutoff;
};

AnsatzField build_V(const ModParams& gamma, const ProfileSet& profiles, const PeriodicGrid& grid,
                    const AnsatzOptions& options = {});

struct ResidualDecomposition {
    Eigen::VectorXd EV;  // d_t V + d_y(V_yy - V + |V|^{p-1} V)
    Eigen::Vector2d m1 = Eigen::Vector2d::Zero(), m2 = Eigen::Vector2d::Zero();
    Eigen::VectorXd lambda_R1, dy_R1, lambda_R2, dy_R2;  // M1 = (lambda_R1, -dy_R1), M2 = sigma(...)
    Eigen::VectorXd E;                                    // EV - m1.M1 - m2.M2
    // pieces of EV = E_R + I(r) phi + K1 + J1 + J2 + K2
    Eigen::VectorXd E_R, I_phi, K1, K2, J1, J2, G;
    double norm_E_h1 = 0, norm_EV_h1 = 0;
    double exactness = 0;       // max |EV - (m1.M1 + m2.M2 + E)|
    double assembly_gap = 0;    // max |EV - (sum of the pieces)| against the direct assembly
    double spectral_tail = 0;   // upper-third spectral weight of E relative to |V|_{L2}
};

// Throws std::runtime_error("grid too coarse") when spectral_tail exceeds 1e-9.
ResidualDecomposition flow_residual(const ModParams& gamma, const ModRates& rates, const ProfileSet& profiles,
                                    const PeriodicGrid& grid, const AnsatzOptions& options = {});

struct InteractionTerm {
    Eigen::VectorXd G;            // d_y(|R|^{p-1}R - R1^p - sigma R2^p), R = R1 + sigma R2
    Eigen::VectorXd closed_form;  // p c_Q e^{-z}(sigma d_y[e^{-(y-z1)} Q^{p-1}(y-z1)] + d_y[e^{y-z2} Q^{p-1}(y-z2)])
    double difference_h1 = 0;
    double g_h1 = 0;
};

InteractionTerm interaction_leading_term(const ModParams& gamma, int p, const PeriodicGrid& grid);

// Periodic grid with spacing <= h covering the cutoff transition and both bubbles with margin.
PeriodicGrid residual_grid(const ModParams& gamma, double h = 1.0 / 32, double margin = 40.0,
                           double scale_limit = std::numeric_limits<double>::infinity());

}  // namespace gkdv
