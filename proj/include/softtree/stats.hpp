#pragma once

namespace softtree {

// Standard normal CDF, absolute error well under 1e-9 everywhere.
double normal_cdf(double z);

// Regularized incomplete beta I_x(a, b), a > 0, b > 0, x in [0, 1].
// Continued-fraction evaluation, accurate to ~1e-14 relative.
double incomplete_beta(double a, double b, double x);

// P[Binomial(n, p) <= k] for real n > 0, integer 0 <= k. Values of k >= n
// give 1. Evaluated as I_{1-p}(n - k, k + 1), which also covers fractional n.
double binomial_cdf(double k, double n, double p);

}  // namespace softtree
