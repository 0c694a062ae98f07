#include "gkdv/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace gkdv {

GaussRule gauss_legendre(int order)
{
    if (order < 1) throw std::invalid_argument("gauss_legendre: order must be positive");
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(order, order);
    for (int k = 1; k < order; ++k) {
        const double b = k / std::sqrt(4.0 * k * k - 1.0);
        J(k, k - 1) = b;
        J(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    GaussRule rule;
    rule.nodes = es.eigenvalues();
    rule.weights = 2.0 * es.eigenvectors().row(0).transpose().array().square();
    return rule;
}

PanelQuadrature::PanelQuadrature(double a, double b, double panel_width, int order)
    : a_(a), b_(b)
{
    if (!(b > a) || !(panel_width > 0)) throw std::invalid_argument("PanelQuadrature: bad interval");
    const auto rule = gauss_legendre(order);
    const int panels = static_cast<int>(std::ceil((b - a) / panel_width - 1e-12));
    const double width = (b - a) / panels;
    x_.resize(panels * order);
    w_.resize(panels * order);
    for (int j = 0; j < panels; ++j) {
        const double mid = a + (j + 0.5) * width;
        x_.segment(j * order, order) = (mid + 0.5 * width * rule.nodes.array()).matrix();
        w_.segment(j * order, order) = 0.5 * width * rule.weights;
    }
}

double PanelQuadrature::integrate(const std::function<double(double)>& f) const
{
    // long double accumulator: the identity checks sit near 1e-12.
    long double acc = 0;
    for (Eigen::Index i = 0; i < x_.size(); ++i) acc += w_[i] * f(x_[i]);
    return static_cast<double>(acc);
}

}  // namespace gkdv
