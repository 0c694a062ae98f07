#include "gkdv/fitting.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace gkdv {

LineFit fit_line(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size()) throw std::invalid_argument("fit_line: size mismatch");
    const auto n = static_cast<Eigen::Index>(x.size());
    if (n < 2) throw std::invalid_argument("fit_line: need at least two points");
    Eigen::MatrixXd A(n, 2);
    Eigen::VectorXd b(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        A(i, 0) = 1;
        A(i, 1) = x[i];
        b[i] = y[i];
    }
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    if (qr.rank() < 2) throw std::invalid_argument("fit_line: abscissae are all equal");
    const Eigen::Vector2d c = qr.solve(b);
    const Eigen::VectorXd res = A * c - b;
    LineFit out;
    out.intercept = c[0];
    out.slope = c[1];
    out.rms_residual = std::sqrt(res.squaredNorm() / n);
    if (n > 2) {
        const double s2 = res.squaredNorm() / (n - 2);
        const Eigen::Matrix2d cov = s2 * (A.transpose() * A).inverse();
        out.slope_stderr = std::sqrt(cov(1, 1));
    }
    return out;
}

}  // namespace gkdv
