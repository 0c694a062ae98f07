#include "gkdv/soliton.hpp"

#include "gkdv/quadrature.hpp"

#include <cmath>

namespace gkdv {

SolitonIntegrals soliton_integrals(int p, double half_width, double panel_width)
{
    const GroundState<double> Q{Power(p)};
    // Largest integrand at the window edge is Q itself (slowest decay).
    const double tail = Q.value(half_width);
    if (tail > 1e-15)
        throw std::domain_error("soliton_integrals: quadrature window too small, tail " + std::to_string(tail));

    const PanelQuadrature quad(-half_width, half_width, panel_width, 8);
    const double a = 1.0 / (p - 1);
    SolitonIntegrals out;
    out.p = p;
    out.tail_estimate = tail;
    out.mass = quad.integrate([&](double x) { return std::exp(2 * Q.log_value(x)); });
    out.q_lambda_q = quad.integrate([&](double x) { return Q.value(x) * Q.lambda(x); });
    out.q_lambda_q_identity = (a - 0.25) * out.mass;
    out.exp_moment = quad.integrate([&](double x) { return Q.weighted_power(x, -1.0, p); });
    out.exp_moment_identity = 2 * Q.tail_constant();
    out.integral_q = quad.integrate([&](double x) { return Q.value(x); });
    out.integral_lambda_q = quad.integrate([&](double x) { return Q.lambda(x); });
    out.integral_lambda_q_identity = (a - 0.5) * out.integral_q;
    out.integral_q_pm1 = quad.integrate([&](double x) { return Q.weighted_power(x, 0.0, p - 1); });
    for (int r = 1; r <= 3; ++r) {
        const double lhs = quad.integrate([&](double x) { return Q.weighted_power(x, 0.0, r + p - 1); });
        const double rhs = quad.integrate([&](double x) { return Q.weighted_power(x, 0.0, r); });
        out.power_ratio_error[r - 1] = lhs / (r * (p + 1.0) / (2.0 * r + p - 1.0) * rhs) - 1.0;
    }
    return out;
}

AlphaConstant alpha_constant(int p)
{
    const Power power(p);
    power.require_noncritical("alpha_constant");
    const GroundState<double> Q{power};
    const auto I = soliton_integrals(p);
    AlphaConstant out;
    out.alpha_closed = 8.0 * (p - 1) / std::abs(5 - p) * std::pow(2.0 * p + 2.0, 2.0 / (p - 1)) / I.mass;
    out.alpha_ratio = -power.sigma() * Q.tail_constant() * I.exp_moment / I.q_lambda_q;
    out.alpha = out.alpha_closed;
    out.speed = std::sqrt(out.alpha);
    out.relative_mismatch = std::abs(out.alpha_ratio - out.alpha_closed) / out.alpha_closed;
    return out;
}

}  // namespace gkdv
