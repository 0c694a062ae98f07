#pragma once

#include <Eigen/Dense>
#include <functional>

namespace gkdv {

// Gauss-Legendre nodes/weights on [-1, 1] (Golub-Welsch).
struct GaussRule {
    Eigen::VectorXd nodes;
    Eigen::VectorXd weights;
};

GaussRule gauss_legendre(int order);

// Composite Gauss-Legendre over equal panels of width <= panel_width.
class PanelQuadrature {
public:
    PanelQuadrature(double a, double b, double panel_width = 0.125, int order = 8);

    double integrate(const std::function<double(double)>& f) const;

    // Flattened nodes and weights, for callers that want to vectorize.
    const Eigen::VectorXd& nodes() const { return x_; }
    const Eigen::VectorXd& weights() const { return w_; }
    double lower() const { return a_; }
    double upper() const { return b_; }

private:
    double a_, b_;
    Eigen::VectorXd x_, w_;
};

}  // namespace gkdv
