#include "gkdv/ansatz.hpp"

#include "gkdv/quadrature.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace gkdv {

using Eigen::VectorXd;

bool ModParams::admissible() const
{
    return std::abs(mubar()) <= std::exp(-9.0 * z() / 16) && std::abs(zbar()) <= std::exp(-z() / 32);
}

ModRates formal_flow(const ModParams& g, const ProfileSet& P)
{
    const double ez = std::exp(-g.z());
    return {-P.alpha * ez, P.alpha * ez, g.mu1 + P.a1 * ez, g.mu2 - P.a2 * ez};
}

ModParams symmetric_params(double z, double alpha)
{
    const double mu = 2 * std::sqrt(alpha) * std::exp(-z / 2);
    return {mu / 2, -mu / 2, z / 2, -z / 2};
}

// ---------------------------------------------------------------------------------------

namespace {

// b(u) = exp(-1/(u(1-u))) and its first two derivatives; zero where b underflows.
struct Bump {
    double b, d1, d2;
};

Bump bump(double u)
{
    if (u <= 0 || u >= 1) return {0, 0, 0};
    const double w = 1 / (u * (1 - u));
    if (w > 700) return {0, 0, 0};
    const double b = std::exp(-w);
    const double s = 1 - 2 * u;
    const double g1 = s * w * w;
    const double g2 = -2 * w * w - 2 * s * s * w * w * w;
    return {b, g1 * b, (g2 + g1 * g1) * b};
}

}  // namespace

BumpCutoff::BumpCutoff() : cells_(4096), table_(cells_ + 1), normalizer_(1)
{
    const auto rule = gauss_legendre(8);
    const double h = 1.0 / cells_;
    table_[0] = 0;
    for (int k = 0; k < cells_; ++k) {
        double s = 0;
        for (int i = 0; i < 8; ++i) s += rule.weights[i] * bump((k + 0.5 + 0.5 * rule.nodes[i]) * h).b;
        table_[k + 1] = table_[k] + 0.5 * h * s;
    }
    normalizer_ = table_[cells_];
    table_ /= normalizer_;
}

const BumpCutoff& BumpCutoff::instance()
{
    static const BumpCutoff cutoff;
    return cutoff;
}

double BumpCutoff::value(double x) const
{
    const double u = 2 * x;
    if (u <= 0) return 0;
    if (u >= 1) return 1;
    const double pos = u * cells_;
    const int k = std::min(static_cast<int>(pos), cells_ - 1);
    const double t = pos - k, h = 1.0 / cells_;
    const double m0 = bump(k * h).b / normalizer_, m1 = bump((k + 1) * h).b / normalizer_;
    const double t2 = t * t, t3 = t2 * t;
    const double s = (2 * t3 - 3 * t2 + 1) * table_[k] + (t3 - 2 * t2 + t) * h * m0 + (-2 * t3 + 3 * t2) * table_[k + 1]
         + (t3 - t2) * h * m1;
    return std::clamp(s, 0.0, 1.0);
}

double BumpCutoff::derivative(double x, int order) const
{
    const Bump b = bump(2 * x);
    switch (order) {
    case 1: return 2 * b.b / normalizer_;
    case 2: return 4 * b.d1 / normalizer_;
    case 3: return 8 * b.d2 / normalizer_;
    default: throw std::invalid_argument("BumpCutoff::derivative: order must be 1, 2 or 3");
    }
}

CutoffField build_cutoff(double z, const PeriodicGrid& grid, double scale_limit)
{
    if (!(z > 0)) throw std::invalid_argument("build_cutoff: z must be positive");
    const auto& psi = BumpCutoff::instance();
    CutoffField c;
    const double natural = std::exp(z / 2);
    c.clamped = natural > scale_limit;
    c.scale = c.clamped ? scale_limit : natural;
    const int n = grid.n;
    c.phi.resize(n);
    c.d1.resize(n);
    c.d2.resize(n);
    c.d3.resize(n);
    c.tilde.resize(n);
    c.dz.resize(n);
    const double s = c.scale;
    for (int j = 0; j < n; ++j) {
        const double y = grid.node(j);
        const double arg = y / s + 1;
        c.phi[j] = psi.value(arg);
        c.tilde[j] = psi.derivative(arg, 1);
        c.d1[j] = c.tilde[j] / s;
        c.d2[j] = psi.derivative(arg, 2) / (s * s);
        c.d3[j] = psi.derivative(arg, 3) / (s * s * s);
        c.dz[j] = c.clamped ? 0.0 : -0.5 * y / s * c.tilde[j];
    }
    return c;
}

PeriodicGrid residual_grid(const ModParams& g, double h, double margin, double scale_limit)
{
    const double s = std::min(std::exp(g.z() / 2), scale_limit);
    const double left = std::min(-s, std::min(g.z1, g.z2)) - margin;
    const double right = std::max(g.z1, g.z2) + margin;
    const auto needed = static_cast<unsigned long>(std::ceil((right - left) / h));
    const int n = static_cast<int>(std::bit_ceil(std::max(needed, 16ul)));
    return PeriodicGrid::make(0.5 * n * h, n, 0.5 * (left + right));
}

// ---------------------------------------------------------------------------------------

namespace {

void require_inside(const ModParams& g, const PeriodicGrid& grid)
{
    for (double c : {g.z1, g.z2})
        if (c < grid.left() + 10 || c > grid.right() - 10)
            throw std::invalid_argument("ansatz: grid too small, a soliton centre lies within 10 units of the boundary");
    if (!(g.z() > 0)) throw std::invalid_argument("ansatz: need z1 > z2");
}

double fprime(double u, int p) { return p * std::pow(std::abs(u), p - 1); }

}  // namespace

AnsatzField build_V(const ModParams& g, const ProfileSet& P, const PeriodicGrid& grid, const AnsatzOptions& options)
{
    require_inside(g, grid);
    const GroundState<double> Q{Power(P.p)};
    AnsatzField a;
    a.gamma = g;
    a.sigma = P.sigma;
    a.cutoff = build_cutoff(g.z(), grid, options.cutoff_scale_limit);
    const double ez = std::exp(-g.z());
    a.R1 = grid.sample([&](double y) { return Q.value(y - g.z1, 1 + g.mu1); });
    a.R2 = grid.sample([&](double y) { return Q.value(y - g.z2, 1 + g.mu2); });
    if (options.with_correction)
        a.r = grid.sample([&](double y) { return ez * (P.evaluate(1, y - g.z1).f + P.evaluate(2, y - g.z2).f); });
    else
        a.r = VectorXd::Zero(grid.n);
    a.rtilde = a.r.cwiseProduct(a.cutoff.phi);
    a.V = a.R1 + P.sigma * a.R2 + a.rtilde;
    return a;
}

ResidualDecomposition flow_residual(const ModParams& g, const ModRates& rate, const ProfileSet& P,
                                    const PeriodicGrid& grid, const AnsatzOptions& options)
{
    require_inside(g, grid);
    const int p = P.p;
    const double sigma = P.sigma;
    const GroundState<double> Q{Power(p)};
    const CutoffField c = build_cutoff(g.z(), grid, options.cutoff_scale_limit);
    const double ez = std::exp(-g.z());
    const double v1 = 1 + g.mu1, v2 = 1 + g.mu2;
    const int n = grid.n;

    ResidualDecomposition out;
    out.m1 = {rate.mu1 + P.alpha * ez, rate.z1 - g.mu1 - P.a1 * ez};
    out.m2 = {rate.mu2 - P.alpha * ez, rate.z2 - g.mu2 + P.a2 * ez};
    for (VectorXd* v : {&out.EV, &out.E, &out.lambda_R1, &out.dy_R1, &out.lambda_R2, &out.dy_R2, &out.E_R, &out.I_phi,
                        &out.K1, &out.K2, &out.J1, &out.J2, &out.G})
        v->resize(n);
    VectorXd V(n);

    for (int j = 0; j < n; ++j) {
        const double y = grid.node(j);
        const double x1 = y - g.z1, x2 = y - g.z2;
        const double R1 = Q.value(x1, v1), R1d = Q.d1(x1, v1), LR1 = Q.lambda(x1, v1);
        const double R2 = Q.value(x2, v2), R2d = Q.d1(x2, v2), LR2 = Q.lambda(x2, v2);

        double r = 0, rd = 0, rdd = 0, rddd = 0, dr_z1 = 0, dr_z2 = 0;
        if (options.with_correction) {
            const auto A1 = P.evaluate(1, x1), A2 = P.evaluate(2, x2);
            r = ez * (A1.f + A2.f);
            rd = ez * (A1.d1 + A2.d1);
            rdd = ez * (A1.d2 + A2.d2);
            rddd = ez * (A1.d3 + A2.d3);
            dr_z1 = -r - ez * A1.d1;
            dr_z2 = r - ez * A2.d1;
        }
        const double ph = c.phi[j], ph1 = c.d1[j], ph2 = c.d2[j], ph3 = c.d3[j], phz = c.dz[j];
        const double rt = r * ph;
        const double rt1 = rd * ph + r * ph1;
        const double rt3 = rddd * ph + 3 * rdd * ph1 + 3 * rd * ph2 + r * ph3;
        const double drt_z1 = dr_z1 * ph + r * phz;
        const double drt_z2 = dr_z2 * ph - r * phz;

        const double Rs = R1 + sigma * R2, Rsd = R1d + sigma * R2d;
        const double Vv = Rs + rt, Vd = Rsd + rt1;
        V[j] = Vv;

        const double soliton_part = rate.mu1 * LR1 - (rate.z1 - g.mu1) * R1d
                                  + sigma * (rate.mu2 * LR2 - (rate.z2 - g.mu2) * R2d);
        const double G = fprime(Rs, p) * Rsd - fprime(R1, p) * R1d - sigma * fprime(R2, p) * R2d;
        const double Pot = p * (std::pow(R1, p - 1) + std::pow(R2, p - 1));
        const double Potd = p * (p - 1) * (std::pow(R1, p - 2) * R1d + std::pow(R2, p - 2) * R2d);

        // direct assembly
        const double dt_rt = rate.z1 * drt_z1 + rate.z2 * drt_z2;
        const double nonlinear = fprime(Vv, p) * Vd - fprime(R1, p) * R1d - sigma * fprime(R2, p) * R2d;
        const double ev = soliton_part + dt_rt + rt3 - rt1 + nonlinear;

        // grouped pieces
        out.G[j] = G;
        out.E_R[j] = soliton_part + G;
        out.I_phi[j] = (rddd - rd + Potd * r + Pot * rd) * ph;
        out.K1[j] = g.mu1 * drt_z1 + g.mu2 * drt_z2;
        out.K2[j] = Pot * r * ph1 - r * ph1 + r * ph3 + 3 * rd * ph2 + 3 * rdd * ph1;
        out.J1[j] = (rate.z1 - g.mu1) * drt_z1 + (rate.z2 - g.mu2) * drt_z2;
        out.J2[j] = fprime(Vv, p) * Vd - fprime(Rs, p) * Rsd - (Potd * rt + Pot * rt1);
        const double pieces = out.E_R[j] + out.I_phi[j] + out.K1[j] + out.J1[j] + out.J2[j] + out.K2[j];
        out.assembly_gap = std::max(out.assembly_gap, std::abs(ev - pieces));

        out.EV[j] = ev;
        out.lambda_R1[j] = LR1;
        out.dy_R1[j] = R1d;
        out.lambda_R2[j] = LR2;
        out.dy_R2[j] = R2d;
        const double mM = out.m1[0] * LR1 - out.m1[1] * R1d + sigma * (out.m2[0] * LR2 - out.m2[1] * R2d);
        out.E[j] = ev - mM;
        out.exactness = std::max(out.exactness, std::abs(ev - (mM + out.E[j])));
    }

    const SpectralDifferentiator D(grid);
    out.norm_E_h1 = D.h1_norm(out.E);
    out.norm_EV_h1 = D.h1_norm(out.EV);
    out.spectral_tail = D.band_norm(out.E, 2.0 / 3) / grid.norm(V);
    if (out.spectral_tail > 1e-9)
        throw std::runtime_error("flow_residual: grid too coarse (spectral tail of the residual above 1e-9 of |V|)");
    return out;
}

InteractionTerm interaction_leading_term(const ModParams& g, int p, const PeriodicGrid& grid)
{
    require_inside(g, grid);
    const Power power(p);
    const GroundState<double> Q{power};
    const double sigma = power.sigma();
    const double ez = std::exp(-g.z());
    const double cq = Q.tail_constant();
    InteractionTerm out;
    out.G = grid.sample([&](double y) {
        const double R1 = Q.value(y - g.z1, 1 + g.mu1), R1d = Q.d1(y - g.z1, 1 + g.mu1);
        const double R2 = Q.value(y - g.z2, 1 + g.mu2), R2d = Q.d1(y - g.z2, 1 + g.mu2);
        const double Rs = R1 + sigma * R2, Rsd = R1d + sigma * R2d;
        return fprime(Rs, p) * Rsd - fprime(R1, p) * R1d - sigma * fprime(R2, p) * R2d;
    });
    out.closed_form = grid.sample([&](double y) {
        const double x1 = y - g.z1, x2 = y - g.z2;
        const double left = Q.weighted_power(x1, -1.0, p - 1) * (-1 + (p - 1) * Q.log_derivative(x1));
        const double right = Q.weighted_power(x2, 1.0, p - 1) * (1 + (p - 1) * Q.log_derivative(x2));
        return p * cq * ez * (sigma * left + right);
    });
    const SpectralDifferentiator D(grid);
    out.difference_h1 = D.h1_norm(out.G - out.closed_form);
    out.g_h1 = D.h1_norm(out.G);
    return out;
}

}  // namespace gkdv
