#include "gkdv/linearized.hpp"

#include "gkdv/quadrature.hpp"
#include "gkdv/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gkdv {

namespace {

using Eigen::VectorXd;
using Triplets = std::vector<Eigen::Triplet<double>>;

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

// Centred fourth-order stencils (one-sided variants).
constexpr double kD1[5] = {1.0 / 12, -8.0 / 12, 0.0, 8.0 / 12, -1.0 / 12};
constexpr double kD2[5] = {-1.0 / 12, 16.0 / 12, -30.0 / 12, 16.0 / 12, -1.0 / 12};
// Centred eighth-order stencils for decaying data (operator L, eigenproblems).
constexpr int kHalf = 4;
constexpr double kD1Wide[9] = {1.0 / 280, -4.0 / 105, 1.0 / 5, -4.0 / 5, 0.0, 4.0 / 5, -1.0 / 5, 4.0 / 105, -1.0 / 280};
constexpr double kD2Wide[9] = {-1.0 / 560, 8.0 / 315, -1.0 / 5, 8.0 / 5, -205.0 / 72,
                               8.0 / 5,    -1.0 / 5,  8.0 / 315, -1.0 / 560};
// One-sided fourth-order closures for the first two rows.
constexpr double kD1Edge[2][5] = {{-25.0 / 12, 48.0 / 12, -36.0 / 12, 16.0 / 12, -3.0 / 12},
                                  {-3.0 / 12, -10.0 / 12, 18.0 / 12, -6.0 / 12, 1.0 / 12}};
constexpr double kD2Edge[2][6] = {{45.0 / 12, -154.0 / 12, 214.0 / 12, -156.0 / 12, 61.0 / 12, -10.0 / 12},
                                  {10.0 / 12, -15.0 / 12, -4.0 / 12, 14.0 / 12, -6.0 / 12, 1.0 / 12}};

template <int W>
VectorXd centred(const VectorXd& f, const double (&w)[W], double scale)
{
    constexpr int half = W / 2;
    const Eigen::Index n = f.size();
    VectorXd out(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double s = 0;
        for (int k = -half; k <= half; ++k) {
            const Eigen::Index j = i + k;
            if (j >= 0 && j < n) s += w[k + half] * f[j];
        }
        out[i] = s * scale;
    }
    return out;
}

void close_edges_d1(const VectorXd& f, VectorXd& out, double h)
{
    const Eigen::Index n = f.size();
    for (int r = 0; r < 2; ++r) {
        double left = 0, right = 0;
        for (int k = 0; k < 5; ++k) {
            left += kD1Edge[r][k] * f[k];
            right -= kD1Edge[r][k] * f[n - 1 - k];
        }
        out[r] = left / h;
        out[n - 1 - r] = right / h;
    }
}

void close_edges_d2(const VectorXd& f, VectorXd& out, double h)
{
    const Eigen::Index n = f.size();
    for (int r = 0; r < 2; ++r) {
        double left = 0, right = 0;
        for (int k = 0; k < 6; ++k) {
            left += kD2Edge[r][k] * f[k];
            right += kD2Edge[r][k] * f[n - 1 - k];
        }
        out[r] = left / (h * h);
        out[n - 1 - r] = right / (h * h);
    }
}

Eigen::SparseMatrix<double> banded_d1(int n, double h)
{
    Triplets t;
    for (int i = 0; i < n; ++i)
        for (int k = -kHalf; k <= kHalf; ++k)
            if (k != 0 && i + k >= 0 && i + k < n) t.emplace_back(i, i + k, kD1Wide[k + kHalf] / h);
    Eigen::SparseMatrix<double> m(n, n);
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

Eigen::SparseMatrix<double> banded_l(const VectorXd& potential, double h)
{
    const int n = static_cast<int>(potential.size());
    Triplets t;
    for (int i = 0; i < n; ++i)
        for (int k = -kHalf; k <= kHalf; ++k)
            if (i + k >= 0 && i + k < n) {
                double v = -kD2Wide[k + kHalf] / (h * h);
                if (k == 0) v += 1.0 - potential[i];
                t.emplace_back(i, i + k, v);
            }
    Eigen::SparseMatrix<double> m(n, n);
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

// Cumulative integral from x_j to +infinity of f, per-cell Gauss-Legendre.
template <typename F>
VectorXd integral_to_infinity(const LineGrid& grid, F&& f)
{
    const auto rule = gauss_legendre(8);
    auto segment = [&](double a, double b) {
        double s = 0;
        for (int k = 0; k < 8; ++k) {
            const double x = 0.5 * (a + b) + 0.5 * (b - a) * rule.nodes[k];
            s += rule.weights[k] * f(x);
        }
        return 0.5 * (b - a) * s;
    };
    VectorXd out(grid.n);
    // tail beyond the last node, panels of unit width out to 60 more units
    double acc = 0;
    const double last = grid.node(grid.n - 1);
    for (int k = 0; k < 240; ++k) acc += segment(last + 0.25 * k, last + 0.25 * (k + 1));
    out[grid.n - 1] = acc;
    for (int j = grid.n - 2; j >= 0; --j) {
        acc += segment(grid.node(j), grid.node(j + 1));
        out[j] = acc;
    }
    return out;
}

}  // namespace

LineGrid LineGrid::make(double half_width, int n)
{
    if (!(half_width > 0)) throw std::invalid_argument("LineGrid: half width must be positive");
    if (!power_of_two(n) || n < 16) throw std::invalid_argument("LineGrid: n must be a power of two >= 16");
    return LineGrid{half_width, n};
}

VectorXd LineGrid::nodes() const
{
    return sample([](double x) { return x; });
}

VectorXd fd_d1_decaying(const VectorXd& f, double h) { return centred(f, kD1Wide, 1.0 / h); }
VectorXd fd_d2_decaying(const VectorXd& f, double h) { return centred(f, kD2Wide, 1.0 / (h * h)); }

VectorXd fd_d1_one_sided(const VectorXd& f, double h)
{
    VectorXd out = centred(f, kD1, 1.0 / h);
    close_edges_d1(f, out, h);
    return out;
}

VectorXd fd_d2_one_sided(const VectorXd& f, double h)
{
    VectorXd out = centred(f, kD2, 1.0 / (h * h));
    close_edges_d2(f, out, h);
    return out;
}

double interpolate(const LineGrid& grid, Eigen::Ref<const VectorXd> f, double x)
{
    constexpr int kPoints = 8;
    const double h = grid.spacing();
    const double s = (x + grid.half_width) / h - 0.5;  // fractional node index
    if (s < -kPoints || s > grid.n - 1 + kPoints) return 0.0;
    const int j0 = static_cast<int>(std::floor(s)) - kPoints / 2 + 1;
    double out = 0;
    for (int a = 0; a < kPoints; ++a) {
        const int ja = j0 + a;
        if (ja < 0 || ja >= grid.n) continue;
        double w = 1;
        for (int b = 0; b < kPoints; ++b)
            if (b != a) w *= (s - (j0 + b)) / double(a - b);
        out += w * f[ja];
    }
    return out;
}

// ---------------------------------------------------------------------------------------

OperatorL::OperatorL(Power power, LineGrid grid) : power_(power), grid_(grid)
{
    const GroundState<double> Q{power};
    const int p = power.p();
    potential_ = grid_.sample([&](double x) { return p * Q.weighted_power(x, 0.0, p - 1); });
    kernel_ = grid_.sample([&](double x) { return Q.d1(x); });
    matrix_ = banded_l(potential_, grid_.spacing());

    const int n = grid_.n;
    Triplets t;
    t.reserve(matrix_.nonZeros() + 2 * n);
    for (int k = 0; k < matrix_.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(matrix_, k); it; ++it)
            t.emplace_back(it.row(), it.col(), it.value());
    for (int i = 0; i < n; ++i) {
        t.emplace_back(i, n, kernel_[i]);
        t.emplace_back(n, i, kernel_[i]);
    }
    Eigen::SparseMatrix<double> bordered(n + 1, n + 1);
    bordered.setFromTriplets(t.begin(), t.end());
    bordered_ = std::make_shared<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
    bordered_->compute(bordered);
    if (bordered_->info() != Eigen::Success) throw std::runtime_error("OperatorL: bordered factorization failed");
}

VectorXd OperatorL::apply(const VectorXd& f) const
{
    if (f.size() != grid_.n) throw std::invalid_argument("OperatorL::apply: grid mismatch");
    return matrix_ * f;
}

VectorXd OperatorL::apply_one_sided(const VectorXd& f) const
{
    if (f.size() != grid_.n) throw std::invalid_argument("OperatorL::apply_one_sided: grid mismatch");
    return (-fd_d2_one_sided(f, grid_.spacing()).array() + (1.0 - potential_.array()) * f.array()).matrix();
}

VectorXd OperatorL::solve(const VectorXd& rhs, double solvability_tol) const
{
    if (rhs.size() != grid_.n) throw std::invalid_argument("OperatorL::solve: grid mismatch");
    const double scale = grid_.norm(rhs) * grid_.norm(kernel_);
    if (scale > 0 && std::abs(grid_.dot(rhs, kernel_)) > solvability_tol * scale)
        throw std::domain_error("OperatorL::solve: right side not orthogonal to Q' (Fredholm condition fails)");
    VectorXd b(grid_.n + 1);
    b.head(grid_.n) = rhs;
    b[grid_.n] = 0;
    const VectorXd sol = bordered_->solve(b);
    return sol.head(grid_.n);
}

VectorXd solve_L_constrained(const OperatorL& op, const VectorXd& g, const std::optional<WeightedConstraint>& constraint)
{
    VectorXd f = op.solve(-g);
    if (constraint) {
        const auto& grid = op.grid();
        const double pivot = grid.dot(op.kernel(), constraint->weight);
        const double scale = grid.norm(op.kernel()) * grid.norm(constraint->weight);
        if (!(std::abs(pivot) > 1e-10 * scale))
            throw std::domain_error("solve_L_constrained: constraint is degenerate along the kernel");
        f += (constraint->target - grid.dot(f, constraint->weight)) / pivot * op.kernel();
    }
    return f;
}

// ---------------------------------------------------------------------------------------

void ProfileSet::finalize()
{
    const double h = grid.spacing();
    auto table = [&](const VectorXd& f) {
        Eigen::MatrixXd t(f.size(), 4);
        t.col(0) = f;
        t.col(1) = fd_d1_decaying(f, h);
        t.col(2) = fd_d2_decaying(f, h);
        t.col(3) = fd_d1_decaying(t.col(2), h);
        return t;
    };
    table1_ = table(hat1);
    table2_ = table(hat2);
}

ProfileSet::Values ProfileSet::evaluate(int k, double x) const
{
    const Eigen::MatrixXd& t = (k == 1) ? table1_ : table2_;
    if (t.rows() != grid.n) throw std::logic_error("ProfileSet::evaluate before finalize()");
    const double c = (k == 1) ? plateau1() : plateau2();
    const double b = 0.5 * (p - 1);
    const double th = std::tanh(b * x);
    const double s = 1 - th * th;
    const GroundState<double> Q{Power(p)};
    Values v;
    v.f = interpolate(grid, t.col(0), x) + c * Q.one_plus_log_derivative(x);
    v.d1 = interpolate(grid, t.col(1), x) - c * b * s;
    v.d2 = interpolate(grid, t.col(2), x) + c * 2 * b * b * th * s;
    v.d3 = interpolate(grid, t.col(3), x) + c * 2 * b * b * b * s * (1 - 3 * th * th);
    return v;
}

VectorXd ProfileSet::full(int k) const
{
    const GroundState<double> Q{Power(p)};
    const VectorXd T = grid.sample([&](double x) { return Q.one_plus_log_derivative(x); });
    return k == 1 ? VectorXd(hat1 + plateau1() * T) : VectorXd(hat2 + plateau2() * T);
}

ProfileSet build_profiles(int p, const LineGrid& grid, bool with_edge)
{
    const Power power(p);
    power.require_noncritical("build_profiles");
    const GroundState<double> Q{power};
    const OperatorL op(power, grid);
    const int sigma = power.sigma();
    const double cq = Q.tail_constant();

    const auto integrals = soliton_integrals(p);
    ProfileSet out;
    out.p = p;
    out.sigma = sigma;
    out.grid = grid;
    out.alpha = alpha_constant(p).alpha;
    out.theta = 0.5 * out.alpha * integrals.integral_lambda_q;
    const double alpha = out.alpha, theta = out.theta;

    const VectorXd q = grid.sample([&](double x) { return Q.value(x); });
    const VectorXd qpm1 = grid.sample([&](double x) { return Q.weighted_power(x, 0.0, p - 1); });
    const VectorXd left_moment = grid.sample([&](double x) { return Q.weighted_power(x, -1.0, p - 1); });
    const VectorXd right_moment = grid.sample([&](double x) { return Q.weighted_power(x, 1.0, p - 1); });
    const VectorXd T = grid.sample([&](double x) { return Q.one_plus_log_derivative(x); });
    // L(1 + Q'/Q), closed form
    const VectorXd LT = grid.sample([&](double x) {
        return Q.one_plus_log_derivative(x)
             - Q.weighted_power(x, 0.0, p - 1) * (p + (3.0 * p - 1) / (p + 1) * Q.log_derivative(x));
    });
    const VectorXd W = integral_to_infinity(grid, [&](double x) { return Q.lambda(x); });

    // L A_1 = alpha W - a1 Q + sigma p c_Q e^{-x} Q^{p-1}; L A_2 = 2p theta Q^{p-1} - sigma alpha W + sigma a2 Q + p c_Q e^{x} Q^{p-1}
    const VectorXd g1 = alpha * W + sigma * p * cq * left_moment - theta * LT;
    const VectorXd g2 = 2 * p * theta * qpm1 - sigma * alpha * W + p * cq * right_moment + sigma * theta * LT;

    const VectorXd secular = op.solve(-q);  // L S = -Q, S ~ Lambda Q
    const VectorXd hat1 = op.solve(g1);
    const VectorXd hat2 = op.solve(g2);
    const double sq = grid.dot(secular, q);
    const double int_q = grid.dot(T, q);

    out.a1 = -(grid.dot(hat1, q) + theta * int_q) / sq;
    out.a2 = sigma * (grid.dot(hat2, q) + (2.0 - sigma) * theta * int_q) / sq;
    out.hat1 = hat1 + out.a1 * secular;
    out.hat2 = hat2 - sigma * out.a2 * secular;

    const VectorXd& kernel = op.kernel();
    const double kk = grid.dot(kernel, kernel);
    const double tk = grid.dot(T, kernel);
    out.hat1 -= (grid.dot(out.hat1, kernel) + out.plateau1() * tk) / kk * kernel;
    out.hat2 -= (grid.dot(out.hat2, kernel) + out.plateau2() * tk) / kk * kernel;
    out.finalize();

    if (with_edge && power.criticality() == Criticality::supercritical) {
        out.edge = edge_eigenpair(p, default_eigen_grid());
        out.e0 = out.edge->e0;
    }
    return out;
}

ProfileResidual profile_residual(const ProfileSet& P)
{
    const Power power(P.p);
    const GroundState<double> Q{power};
    const auto& grid = P.grid;
    const int p = P.p;
    const double cq = Q.tail_constant();
    const double b = 0.5 * (p - 1);
    const double c = (3.0 * p - 1) / (p + 1);

    // Decaying parts differentiated spectrally on the periodic extension of [-X, X];
    // the plateau term theta T goes through the closed form of (L T)'.
    const SpectralDifferentiator D(PeriodicGrid::make(grid.half_width, grid.n));
    const VectorXd potential = grid.sample([&](double x) { return p * Q.weighted_power(x, 0.0, p - 1); });
    auto d_l = [&](const VectorXd& f) {
        const VectorXd lf = -D.derivative(f, 2) + ((1.0 - potential.array()) * f.array()).matrix();
        return D.derivative(lf, 1);
    };
    const VectorXd d_lt = grid.sample([&](double x) {
        const double t = std::tanh(b * x), s = 1 - t * t;
        const double ell = -t, ell_d = -b * s;
        const double qpm1 = Q.weighted_power(x, 0.0, p - 1);
        return ell_d - (p - 1) * qpm1 * ell * (p + c * ell) - qpm1 * c * ell_d;
    });

    const VectorXd A1 = P.full(1), A2 = P.full(2);
    const VectorXd lam = grid.sample([&](double x) { return Q.lambda(x); });
    const VectorXd dq = grid.sample([&](double x) { return Q.d1(x); });
    const VectorXd q = grid.sample([&](double x) { return Q.value(x); });
    const VectorXd d_left = grid.sample([&](double x) {
        return Q.weighted_power(x, -1.0, p - 1) * (-1.0 + (p - 1) * Q.log_derivative(x));
    });
    const VectorXd d_right = grid.sample([&](double x) {
        return Q.weighted_power(x, 1.0, p - 1) * (1.0 + (p - 1) * Q.log_derivative(x));
    });
    const VectorXd d_qpm1 = grid.sample([&](double x) {
        return (p - 1) * Q.weighted_power(x, 0.0, p - 1) * Q.log_derivative(x);
    });

    const VectorXd r1 = -d_l(P.hat1) - P.plateau1() * d_lt - P.alpha * lam - P.a1 * dq + P.sigma * p * cq * d_left;
    const VectorXd r2 = -d_l(P.hat2) - P.plateau2() * d_lt + 2 * p * P.theta * d_qpm1 + P.sigma * P.alpha * lam
                      + P.sigma * P.a2 * dq + p * cq * d_right;

    ProfileResidual out;
    out.eq1 = grid.norm(r1);
    out.eq2 = grid.norm(r2);
    out.ortho1_kernel = grid.dot(A1, dq);
    out.ortho1_q = grid.dot(A1, q);
    out.ortho2_kernel = grid.dot(A2, dq);
    out.ortho2_q = grid.dot(A2 + VectorXd::Constant(grid.n, 2 * P.theta), q);
    const double half = 0.5 * grid.half_width;
    out.left1 = P.evaluate(1, -half).f;
    out.left2 = P.evaluate(2, -half).f;
    out.right1 = P.evaluate(1, half).f;
    out.right2 = P.evaluate(2, half).f;
    return out;
}

// ---------------------------------------------------------------------------------------

LineGrid default_eigen_grid() { return LineGrid::make(80.0, 8192); }

namespace {

struct RealEigen {
    double value;
    VectorXd vector;
};

// Largest positive real eigenvalue of the dense discretized L d/dx with a localized eigenvector.
RealEigen coarse_edge(const Power& power, const LineGrid& grid)
{
    const OperatorL op(power, grid);
    const Eigen::MatrixXd M = Eigen::MatrixXd(op.matrix()) * Eigen::MatrixXd(banded_d1(grid.n, grid.spacing()));
    Eigen::EigenSolver<Eigen::MatrixXd> es(M);
    if (es.info() != Eigen::Success) throw std::runtime_error("edge_eigenpair: dense eigensolve failed");
    RealEigen best{0.0, VectorXd()};
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        const auto lam = es.eigenvalues()[i];
        if (lam.real() <= 1e-6 || std::abs(lam.imag()) > 1e-8 * std::max(1.0, std::abs(lam.real()))) continue;
        VectorXd v = es.eigenvectors().col(i).real();
        v /= v.norm();
        // localization: most of the weight away from the boundary layers
        const int edge = grid.n / 16;
        const double boundary = v.head(edge).squaredNorm() + v.tail(edge).squaredNorm();
        if (boundary > 1e-2) continue;
        if (lam.real() > best.value) best = {lam.real(), v};
    }
    if (best.vector.size() == 0) throw std::domain_error("edge_eigenpair: no localized real eigenvalue found");
    return best;
}

}  // namespace

EdgeEigenpair edge_eigenpair(int p, const LineGrid& grid)
{
    const Power power(p);
    if (power.criticality() != Criticality::supercritical)
        throw std::domain_error("edge_eigenpair: the real pair +-e0 exists only for p > 5");

    const LineGrid coarse = LineGrid::make(24.0, 512);
    const RealEigen guess = coarse_edge(power, coarse);

    const OperatorL op(power, grid);
    const Eigen::SparseMatrix<double> M = op.matrix() * banded_d1(grid.n, grid.spacing());
    Eigen::SparseMatrix<double> I(grid.n, grid.n);
    I.setIdentity();

    VectorXd v = grid.sample([&](double x) { return interpolate(coarse, guess.vector, x); });
    v /= grid.norm(v);
    double shift = guess.value;
    for (int iter = 0; iter < 60; ++iter) {
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
        lu.compute(Eigen::SparseMatrix<double>(M - shift * I));
        if (lu.info() != Eigen::Success) break;  // shift hit the eigenvalue to roundoff
        VectorXd w = lu.solve(v);
        w /= grid.norm(w);
        if (grid.dot(w, v) < 0) w = -w;
        const double change = grid.norm(w - v);
        v = w;
        const double next = grid.dot(M * v, v);
        const bool settled = change < 1e-13 && std::abs(next - shift) < 1e-14 * std::abs(shift);
        shift = next;
        if (settled) break;
    }
    // sign: positive far to the left
    const int quarter = grid.n / 4;
    if (v.head(quarter).sum() < 0) v = -v;

    EdgeEigenpair out;
    out.e0 = shift;
    out.grid = grid;
    out.plus = v;
    out.minus = v.reverse();
    const double r_plus = grid.norm(M * out.plus - out.e0 * out.plus);
    const double r_minus = grid.norm(M * out.minus + out.e0 * out.minus);
    out.residual = std::max(r_plus, r_minus);
    return out;
}

// ---------------------------------------------------------------------------------------

namespace {

Eigen::MatrixXd coercivity_basis(const OperatorL& op, CoercivityBasis basis, const EdgeEigenpair* edge)
{
    const auto& grid = op.grid();
    const GroundState<double> Q{op.power()};
    if (basis == CoercivityBasis::subcritical) {
        Eigen::MatrixXd B(grid.n, 2);
        B.col(0) = grid.sample([&](double x) { return Q.value(x); });
        B.col(1) = op.kernel();
        return B;
    }
    if (!edge) throw std::invalid_argument("coercivity: supercritical basis needs the edge eigenpair");
    Eigen::MatrixXd B(grid.n, 3);
    B.col(0) = grid.sample([&](double x) { return interpolate(edge->grid, edge->plus, x); });
    B.col(1) = grid.sample([&](double x) { return interpolate(edge->grid, edge->minus, x); });
    B.col(2) = op.kernel();
    return B;
}

Eigen::MatrixXd h1_matrix(const LineGrid& grid)
{
    const double h = grid.spacing();
    Eigen::MatrixXd H = Eigen::MatrixXd::Identity(grid.n, grid.n);
    for (int i = 0; i < grid.n; ++i)
        for (int k = -kHalf; k <= kHalf; ++k)
            if (i + k >= 0 && i + k < grid.n) H(i, i + k) -= kD2Wide[k + kHalf] / (h * h);
    return H;
}

}  // namespace

CoercivityReport coercivity_form(const OperatorL& op, const VectorXd& f, CoercivityBasis basis, const EdgeEigenpair* edge)
{
    const auto& grid = op.grid();
    CoercivityReport out;
    out.quadratic = grid.dot(op.apply(f), f);
    out.h1_squared = grid.dot(f - fd_d2_decaying(f, grid.spacing()), f);
    const Eigen::MatrixXd B = coercivity_basis(op, basis, edge);
    out.projections = grid.spacing() * (B.transpose() * f);
    return out;
}

double coercivity_constant(const OperatorL& op, CoercivityBasis basis, const EdgeEigenpair* edge)
{
    const auto& grid = op.grid();
    if (grid.n > 2048) throw std::invalid_argument("coercivity_constant: dense solve, use n <= 2048");
    const Eigen::MatrixXd B = coercivity_basis(op, basis, edge);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(B);
    const Eigen::MatrixXd full = qr.householderQ();
    const Eigen::MatrixXd P = full.rightCols(grid.n - B.cols());
    const Eigen::MatrixXd A = P.transpose() * Eigen::MatrixXd(op.matrix()) * P;
    const Eigen::MatrixXd H = P.transpose() * h1_matrix(grid) * P;
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(A, H, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

// ---------------------------------------------------------------------------------------

GramianSolve modulated_data_coefficients(const ProfileSet& profiles, double mu1, double mu2, double z1, double z2,
                                         const Eigen::Vector2d& a_in)
{
    if (!profiles.edge) throw std::domain_error("modulated_data_coefficients: needs supercritical profiles");
    const auto& edge = *profiles.edge;
    const GroundState<double> Q{Power(profiles.p)};
    const double half = edge.grid.half_width + 0.5 * std::abs(z1 - z2) + std::max(std::abs(z1), std::abs(z2));
    const double h = edge.grid.spacing();
    const int n = static_cast<int>(std::ceil(2 * half / h));

    // Z_v(x) = v^{1/4} Z(sqrt(v) x) keeps the L2 norm under the scaling.
    auto scaled = [&](const VectorXd& z, double v, double x) {
        return std::pow(v, 0.25) * interpolate(edge.grid, z, std::sqrt(v) * x);
    };
    Eigen::MatrixXd Y(n, 8);
    const double mus[2] = {mu1, mu2}, zs[2] = {z1, z2};
    for (int i = 0; i < n; ++i) {
        const double y = -half + (i + 0.5) * h;
        for (int k = 0; k < 2; ++k) {
            const double v = 1 + mus[k], x = y - zs[k];
            Y(i, 4 * k + 0) = scaled(edge.minus, v, x);
            Y(i, 4 * k + 1) = scaled(edge.plus, v, x);
            Y(i, 4 * k + 2) = Q.value(x, v);
            Y(i, 4 * k + 3) = Q.d1(x, v);
        }
    }
    GramianSolve out;
    out.gramian = h * (Y.transpose() * Y);
    Eigen::Matrix<double, 8, 1> c = Eigen::Matrix<double, 8, 1>::Zero();
    c[0] = a_in[0];
    c[4] = a_in[1];
    Eigen::JacobiSVD<Eigen::Matrix<double, 8, 8>> svd(out.gramian);
    const auto& s = svd.singularValues();
    if (!(s[7] > 1e-12 * s[0])) throw std::runtime_error("modulated_data_coefficients: singular Gramian");
    out.b = out.gramian.fullPivLu().solve(c);
    out.amplification = 1.0 / s[7];
    out.condition = s[0] / s[7];
    out.off_diagonal = out.gramian.block<4, 4>(0, 4).jacobiSvd().singularValues()[0];
    return out;
}

}  // namespace gkdv
