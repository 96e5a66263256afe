#pragma once

#include <functional>

namespace gumbelmark {

struct QuadResult {
    double value = 0.0;
    double abs_error = 0.0;
    int intervals = 0;
    bool converged = false;
};

/// Globally adaptive 15-point Gauss-Kronrod quadrature on [a, b]. The
/// interval with the largest error estimate is bisected until the summed
/// estimate drops below abs_tol or max_intervals is reached.
QuadResult integrate(const std::function<double(double)>& f, double a, double b, double abs_tol,
                     int max_intervals = 4000);

/// Integral over (0,1) for integrands with integrable endpoint singularities
/// (log y at 0, -log(1-y) at 1). Each half is mapped through y = t^2 toward its
/// endpoint, which turns a log singularity into a bounded t log t integrand;
/// the endpoints themselves are never evaluated.
QuadResult integrate_unit(const std::function<double(double)>& f, double abs_tol);

}  // namespace gumbelmark
