#include "gumbelmark/efficiency.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gumbelmark/error.hpp"
#include "gumbelmark/pivotal.hpp"
#include "gumbelmark/quadrature.hpp"
#include "gumbelmark/tokensource.hpp"

namespace gumbelmark {
namespace {

void check(double delta, double epsilon) {
    require(delta > 0.0 && delta < 1.0, "delta must lie in (0,1)");
    require(epsilon > 0.0 && epsilon <= 1.0, "epsilon must lie in (0,1]");
}

}  // namespace

double rate_integrand(double delta, double epsilon, double y) {
    check(delta, epsilon);
    const AltLaw law(least_favorable(delta));
    return -std::log((1.0 - epsilon) + epsilon * law.pdf(y));
}

double optimal_rate(const EfficiencyQuery& query) {
    check(query.delta, query.epsilon);
    require(query.quad_tolerance > 0.0, "quadrature tolerance must be positive");
    const AltLaw law(least_favorable(query.delta));
    const double eps = query.epsilon;
    auto result =
        integrate_unit([&](double y) { return -std::log((1.0 - eps) + eps * law.pdf(y)); }, query.quad_tolerance);
    if (!result.converged)
        throw InvariantError("efficiency quadrature did not reach tolerance (estimate " +
                             std::to_string(result.abs_error) + ")");
    // KL divergence is non-negative; clip quadrature noise around zero
    return std::max(0.0, result.value);
}

std::vector<RatePoint> rate_curve(std::span<const double> deltas, double epsilon, double quad_tolerance) {
    std::vector<RatePoint> curve;
    curve.reserve(deltas.size());
    for (double d : deltas) curve.push_back({d, epsilon, optimal_rate({d, epsilon, quad_tolerance})});
    return curve;
}

std::vector<double> delta_grid(double lo, double hi, double step) {
    require(step > 0.0 && hi >= lo, "delta grid needs lo <= hi and a positive step");
    std::vector<double> grid;
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    for (std::size_t i = 0; i < count; ++i) grid.push_back(lo + step * static_cast<double>(i));
    return grid;
}

}  // namespace gumbelmark
