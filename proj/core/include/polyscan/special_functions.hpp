#pragma once

namespace polyscan {

// Natural log of the gamma function, Lanczos approximation (g=7, 9 terms).
// Accurate to better than 1e-12 relative over [1e-3, 1e7] (absolute near the
// zeros at x=1 and x=2). Throws std::domain_error for x <= 0 or non-finite x.
double log_gamma(double x);

// Regularized incomplete beta I_x(a, b), continued-fraction evaluation
// (modified Lentz). Absolute error <= 1e-10. Throws std::domain_error for
// a <= 0, b <= 0, or x outside [0, 1].
double reg_inc_beta(double a, double b, double x);

} // namespace polyscan
