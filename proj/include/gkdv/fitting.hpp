#pragma once

#include <span>

namespace gkdv {

struct LineFit {
    double slope = 0, intercept = 0;
    double rms_residual = 0;
    double slope_stderr = 0;
};

// Ordinary least squares y ~ intercept + slope x. Needs at least two distinct abscissae.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace gkdv
