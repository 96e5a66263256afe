#pragma once

namespace gumbelmark {

/// Standard normal quantile Phi^{-1}(p) for p in (0,1), Wichura's AS 241
/// (PPND16) rational approximation, about 1e-16 relative accuracy.
double normal_quantile(double p);

/// Standard normal CDF via erfc.
double normal_cdf(double x);

}  // namespace gumbelmark
