#ifndef GBART_SPECIAL_FUNCTIONS_HPP
#define GBART_SPECIAL_FUNCTIONS_HPP

#include <cmath>

namespace gbart {

// Numerically stable 1 / (1 + exp(-x)).
double logistic(double x);

// log(1 + exp(x)), stable for large |x|.
double softplus(double x);

double log_gamma_fn(double x);  // requires x > 0

double digamma(double x);   // requires x > 0
double trigamma(double x);  // requires x > 0

// Regularized upper incomplete gamma Q(a, x) = Gamma(a, x) / Gamma(a);
// Q(a, 0) = 1. Requires a > 0, x >= 0.
double reg_upper_inc_gamma(double a, double x);

double log_normal_pdf(double x, double mean, double sd);

// Density of the half-Cauchy prior with scale c, x > 0.
double log_half_cauchy_pdf(double x, double scale);

}  // namespace gbart

#endif
