#pragma once

#include "gkdv/soliton.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <memory>
#include <limits>
#include <optional>

namespace gkdv {

// Cell-centred nodes x_j = -X + (j + 1/2) h on [-X, X], h = 2X/N; symmetric about 0.
struct LineGrid {
    double half_width = 48.0;
    int n = 8192;

    static LineGrid make(double half_width = 48.0, int n = 8192);
    double spacing() const { return 2 * half_width / n; }
    double node(int j) const { return -half_width + (j + 0.5) * spacing(); }
    Eigen::VectorXd nodes() const;
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

// Finite differences. Decaying variants are eighth order and pad with zeros outside the grid;
// the one-sided variants are fourth order, close inside the grid and accept non-decaying data.
Eigen::VectorXd fd_d1_decaying(const Eigen::VectorXd& f, double h);
Eigen::VectorXd fd_d2_decaying(const Eigen::VectorXd& f, double h);
Eigen::VectorXd fd_d1_one_sided(const Eigen::VectorXd& f, double h);
Eigen::VectorXd fd_d2_one_sided(const Eigen::VectorXd& f, double h);

// L = -d^2 + 1 - p Q^{p-1} on a LineGrid, Dirichlet decay at +-X.
class OperatorL {
public:
    OperatorL(Power power, LineGrid grid);

    const Power& power() const { return power_; }
    const LineGrid& grid() const { return grid_; }
    const Eigen::VectorXd& potential() const { return potential_; }
    const Eigen::VectorXd& kernel() const { return kernel_; }  // Q' samples
    const Eigen::SparseMatrix<double>& matrix() const { return matrix_; }

    Eigen::VectorXd apply(const Eigen::VectorXd& f) const;
    // L applied with one-sided closure, for data with nonzero far-field limits.
    Eigen::VectorXd apply_one_sided(const Eigen::VectorXd& f) const;

    // f with L f = rhs and <f, Q'> = 0 (bordered system). Throws if <rhs, Q'> is not small.
    Eigen::VectorXd solve(const Eigen::VectorXd& rhs, double solvability_tol = 1e-8) const;

private:
    Power power_;
    LineGrid grid_;
    Eigen::VectorXd potential_, kernel_;
    Eigen::SparseMatrix<double> matrix_;
    std::shared_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> bordered_;
};

struct WeightedConstraint {
    Eigen::VectorXd weight;
    double target = 0;
};

// f with L f = -g; the constraint <f, weight> = target is met by adding a multiple of Q'.
Eigen::VectorXd solve_L_constrained(const OperatorL& op, const Eigen::VectorXd& g,
                                    const std::optional<WeightedConstraint>& constraint = std::nullopt);

// Supercritical eigenpair of L d/dx: L (Z^{+-})' = +-e0 Z^{+-}.
struct EdgeEigenpair {
    double e0 = 0;
    LineGrid grid;
    Eigen::VectorXd plus, minus;  // unit L2 norm, plus > 0 far to the left, minus(x) = plus(-x)
    double residual = 0;          // max of the two discrete eigen-residuals (L2)
};

// Coarse dense eigensolve for the guess, inverse iteration on `grid` for the final pair.
EdgeEigenpair edge_eigenpair(int p, const LineGrid& grid);
// Wide grid used by default: the eigenfunctions carry a slow e^{-e0|x|} tail on one side.
LineGrid default_eigen_grid();

// Interaction profiles A_1, A_2 and the constants of the leading-order flow.
class ProfileSet {
public:
    struct Values {
        double f, d1, d2, d3;
    };

    int p = 0;
    int sigma = 0;
    LineGrid grid;
    double alpha = 0, theta = 0, a1 = 0, a2 = 0;
    double e0 = std::numeric_limits<double>::quiet_NaN();
    // Decaying parts on the grid: A_1 = hat1 + theta T, A_2 = hat2 - sigma theta T, T = 1 + Q'/Q.
    Eigen::VectorXd hat1, hat2;
    // Supercritical only (possibly on their own grid).
    std::optional<EdgeEigenpair> edge;

    double plateau1() const { return theta; }
    double plateau2() const { return -sigma * theta; }
    // A_k(x) and its first three derivatives; k in {1, 2}.
    Values evaluate(int k, double x) const;
    Eigen::VectorXd full(int k) const;  // A_k sampled on the grid

    void finalize();  // tabulate derivatives for evaluate()

private:
    Eigen::MatrixXd table1_, table2_;  // columns f, f', f'', f''' of the hats
};

ProfileSet build_profiles(int p, const LineGrid& grid = LineGrid::make(), bool with_edge = true);

struct ProfileResidual {
    double eq1 = 0, eq2 = 0;                    // L2 grid norms of the equation residuals
    double ortho1_kernel = 0, ortho1_q = 0;     // int A1 Q', int A1 Q
    double ortho2_kernel = 0, ortho2_q = 0;     // int A2 Q', int (A2 + 2 theta) Q
    double left1 = 0, left2 = 0, right1 = 0, right2 = 0;  // A_k at -X/2 and +X/2
};

// Plugs the profiles back into their defining equations, differentiating spectrally.
ProfileResidual profile_residual(const ProfileSet& profiles);

struct CoercivityReport {
    double quadratic = 0;       // <Lf, f>
    double h1_squared = 0;      // |f|_{H^1}^2
    Eigen::VectorXd projections; // <f, b_i> for the basis
};

enum class CoercivityBasis { subcritical, supercritical };

CoercivityReport coercivity_form(const OperatorL& op, const Eigen::VectorXd& f, CoercivityBasis basis,
                                 const EdgeEigenpair* edge = nullptr);
// min <Lf,f>/|f|^2_{H^1} over f orthogonal to the basis (dense generalized eigenproblem).
double coercivity_constant(const OperatorL& op, CoercivityBasis basis, const EdgeEigenpair* edge = nullptr);

struct GramianSolve {
    Eigen::Matrix<double, 8, 8> gramian;
    Eigen::Matrix<double, 8, 1> b;
    double amplification = 0;   // |Omega^{-1}|_2, so |b| <= amplification |a_in|
    double off_diagonal = 0;    // spectral norm of the cross-soliton blocks
    double condition = 0;
};

// Coefficients b of eps = sum b_j Y_j, Y = (Z1-, Z1+, R1, dR1, Z2-, Z2+, R2, dR2), meeting
// <eps,Z1-> = a_in(0), <eps,Z2-> = a_in(1), and zero projections on the other six directions.
GramianSolve modulated_data_coefficients(const ProfileSet& profiles, double mu1, double mu2, double z1, double z2,
                                         const Eigen::Vector2d& a_in);

// Local Lagrange interpolation on a LineGrid (zero outside).
double interpolate(const LineGrid& grid, Eigen::Ref<const Eigen::VectorXd> f, double x);

}  // namespace gkdv
