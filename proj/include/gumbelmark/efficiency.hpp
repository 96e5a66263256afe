#pragma once

#include <span>
#include <vector>

namespace gumbelmark {

struct EfficiencyQuery {
    double delta = 0.5;
    double epsilon = 1.0;
    double quad_tolerance = 1e-9;
};

/// KL(mu0, (1 - eps) mu0 + eps mu_{1,P*}) with P* = least_favorable(delta):
/// the integral over (0,1) of -log((1 - eps) + eps f*(y)), f* the watermarked
/// pivot density under P*.
double optimal_rate(const EfficiencyQuery& query);

/// Integrand of optimal_rate at y, for oracles and diagnostics.
double rate_integrand(double delta, double epsilon, double y);

struct RatePoint {
    double delta;
    double epsilon;
    double rate;
};

std::vector<RatePoint> rate_curve(std::span<const double> deltas, double epsilon, double quad_tolerance = 1e-9);

/// deltas from lo to hi inclusive in steps of `step`.
std::vector<double> delta_grid(double lo, double hi, double step);

}  // namespace gumbelmark
