#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace gkdv {

enum class Criticality { subcritical, critical, supercritical };

// Integer exponent of the nonlinearity |u|^{p-1}u.
class Power {
public:
    explicit Power(int p) : p_(p)
    {
        if (p < 3) throw std::invalid_argument("power p must be an integer >= 3, got " + std::to_string(p));
    }

    int p() const { return p_; }
    Criticality criticality() const
    {
        return p_ < 5 ? Criticality::subcritical : (p_ == 5 ? Criticality::critical : Criticality::supercritical);
    }
    // Sign carried by the second bubble; undefined (0) at the critical power.
    int sigma() const { return p_ < 5 ? -1 : (p_ > 5 ? 1 : 0); }
    bool critical() const { return p_ == 5; }

    // sign(u)|u|^p, i.e. |u|^{p-1}u for every integer p.
    template <typename Scalar>
    Scalar nonlinearity(Scalar u) const
    {
        using std::abs;
        using std::pow;
        const Scalar m = pow(abs(u), p_);
        return u < Scalar(0) ? -m : m;
    }

    void require_noncritical(const char* who) const
    {
        if (p_ == 5) throw std::invalid_argument(std::string(who) + ": p = 5 is excluded");
    }

private:
    int p_;
};

// log cosh without overflow, valid for any |y|.
template <typename Scalar>
Scalar log_cosh(Scalar y)
{
    using std::abs;
    using std::exp;
    using std::log;
    using std::log1p;
    const Scalar a = abs(y);
    return a + log1p(exp(Scalar(-2) * a)) - log(Scalar(2));
}

// Ground state Q(x) = ((p+1) / (2 cosh^2((p-1)x/2)))^{1/(p-1)} and its scaling family
// Q_v(x) = v^{1/(p-1)} Q(sqrt(v) x). Every quantity is closed form; no sample is divided.
template <typename Scalar = double>
class GroundState {
public:
    explicit GroundState(Power power) : power_(power)
    {
        const int p = power.p();
        rate_ = Scalar(p - 1) / Scalar(2);
        inv_ = Scalar(1) / Scalar(p - 1);
        log_peak_ = inv_ * std::log(Scalar(p + 1) / Scalar(2));
        tail_ = std::pow(Scalar(2 * p + 2), inv_);
    }

    const Power& power() const { return power_; }
    int p() const { return power_.p(); }
    // c_Q in Q(x) = c_Q e^{-|x|} + O(e^{-2|x|}).
    Scalar tail_constant() const { return tail_; }
    Scalar scaling_exponent() const { return inv_; }

    Scalar log_value(Scalar x) const { return log_peak_ - Scalar(2) * inv_ * log_cosh(rate_ * x); }
    Scalar value(Scalar x) const { return std::exp(log_value(x)); }
    // Q'/Q
    Scalar log_derivative(Scalar x) const { return -std::tanh(rate_ * x); }
    // 1 + Q'/Q, cancellation-free for large positive x.
    Scalar one_plus_log_derivative(Scalar x) const
    {
        const Scalar y = rate_ * x;
        if (y <= Scalar(0)) return Scalar(1) + std::tanh(-y);
        const Scalar e = std::exp(Scalar(-2) * y);
        return Scalar(2) * e / (Scalar(1) + e);
    }
    Scalar d1(Scalar x) const { return value(x) * log_derivative(x); }
    Scalar d2(Scalar x) const
    {
        const Scalar t = std::tanh(rate_ * x);
        return value(x) * (t * t - rate_ * (Scalar(1) - t * t));
    }
    Scalar d3(Scalar x) const
    {
        const Scalar q = value(x);
        return d1(x) * (Scalar(1) - Scalar(p()) * std::pow(q, p() - 1));
    }
    // e^{s x} Q(x)^k evaluated in the log domain.
    Scalar weighted_power(Scalar x, Scalar s, int k) const { return std::exp(s * x + Scalar(k) * log_value(x)); }

    // Q'/Q + 1 - (2/c_Q) e^{-x} Q
    Scalar tail_remainder(Scalar x) const
    {
        return one_plus_log_derivative(x) - Scalar(2) / tail_ * weighted_power(x, Scalar(-1), 1);
    }

    // --- scaling family, v > 0 ---
    Scalar value(Scalar x, Scalar v) const { return std::pow(v, inv_) * value(std::sqrt(v) * x); }
    Scalar d1(Scalar x, Scalar v) const { return std::pow(v, inv_ + Scalar(0.5)) * d1(std::sqrt(v) * x); }
    Scalar d2(Scalar x, Scalar v) const { return std::pow(v, inv_ + Scalar(1)) * d2(std::sqrt(v) * x); }
    Scalar d3(Scalar x, Scalar v) const { return std::pow(v, inv_ + Scalar(1.5)) * d3(std::sqrt(v) * x); }

    // Lambda Q_v = dQ_v/dv = (Q_v/(p-1) + x Q_v'/2) / v
    Scalar lambda(Scalar x, Scalar v = Scalar(1)) const
    {
        return (inv_ * value(x, v) + Scalar(0.5) * x * d1(x, v)) / v;
    }
    // d/dx Lambda Q_v
    Scalar lambda_d1(Scalar x, Scalar v = Scalar(1)) const
    {
        return ((inv_ + Scalar(0.5)) * d1(x, v) + Scalar(0.5) * x * d2(x, v)) / v;
    }
    // d^2/dx^2 Lambda Q_v
    Scalar lambda_d2(Scalar x, Scalar v = Scalar(1)) const
    {
        return ((inv_ + Scalar(1)) * d2(x, v) + Scalar(0.5) * x * d3(x, v)) / v;
    }
    // Lambda^2 Q_v = d^2 Q_v / dv^2
    Scalar lambda2(Scalar x, Scalar v = Scalar(1)) const
    {
        const Scalar a = inv_;
        const Scalar s = std::sqrt(v) * x;
        return a * (a - Scalar(1)) * std::pow(v, a - Scalar(2)) * value(s)
             + Scalar(0.5) * x * (Scalar(2) * a - Scalar(0.5)) * std::pow(v, a - Scalar(1.5)) * d1(s)
             + Scalar(0.25) * x * x * std::pow(v, a - Scalar(1)) * d2(s);
    }

private:
    Power power_;
    Scalar rate_{}, inv_{}, log_peak_{}, tail_{};
};

struct SolitonIntegrals {
    int p = 0;
    double mass = 0;                // int Q^2
    double q_lambda_q = 0;          // int Q LambdaQ, quadrature of the explicit formula
    double q_lambda_q_identity = 0; // (1/(p-1) - 1/4) int Q^2
    double exp_moment = 0;          // int e^{-x} Q^p
    double exp_moment_identity = 0; // 2 c_Q
    double integral_q = 0;          // int Q
    double integral_lambda_q = 0;   // quadrature of LambdaQ
    double integral_lambda_q_identity = 0; // (1/(p-1) - 1/2) int Q
    double integral_q_pm1 = 0;      // int Q^{p-1}
    // int Q^{r+p-1} / (r(p+1)/(2r+p-1) int Q^r) - 1 for r = 1, 2, 3
    double power_ratio_error[3] = {0, 0, 0};
    double tail_estimate = 0;
};

// Composite Gauss-Legendre on [-half_width, half_width]; throws if the truncated tail exceeds 1e-15.
SolitonIntegrals soliton_integrals(int p, double half_width = 40.0, double panel_width = 1.0 / 64.0);

struct AlphaConstant {
    double alpha_closed = 0; // 8(p-1)/|5-p| (2p+2)^{2/(p-1)} / |Q|^2
    double alpha_ratio = 0;  // -sigma c_Q int e^{-x}Q^p / int Q LambdaQ
    double alpha = 0;
    double speed = 0;        // sqrt(alpha), the c of the log law
    double relative_mismatch = 0;
};

AlphaConstant alpha_constant(int p);

}  // namespace gkdv
