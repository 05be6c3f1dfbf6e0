#include "gbart/special_functions.hpp"

#include <cmath>
#include <limits>

#include "gbart/error.hpp"

namespace gbart {

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) {
  if (x > 35.0) return x;
  if (x < -35.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

double log_gamma_fn(double x) {
  if (!(x > 0.0)) throw NumericalError("log_gamma_fn requires x > 0");
  return std::lgamma(x);
}

// Recurrence up to x >= 6, then the asymptotic expansion; good to ~1e-12.
double digamma(double x) {
  if (!(x > 0.0)) throw NumericalError("digamma requires x > 0");
  double result = 0.0;
  while (x < 6.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  double inv = 1.0 / x;
  double inv2 = inv * inv;
  result += std::log(x) - 0.5 * inv;
  result -= inv2 * (1.0 / 12.0 -
                    inv2 * (1.0 / 120.0 -
                            inv2 * (1.0 / 252.0 -
                                    inv2 * (1.0 / 240.0 - inv2 / 132.0))));
  return result;
}

double trigamma(double x) {
  if (!(x > 0.0)) throw NumericalError("trigamma requires x > 0");
  double result = 0.0;
  while (x < 6.0) {
    result += 1.0 / (x * x);
    x += 1.0;
  }
  double inv = 1.0 / x;
  double inv2 = inv * inv;
  result += inv * (1.0 +
                   inv * (0.5 +
                          inv * (1.0 / 6.0 -
                                 inv2 * (1.0 / 30.0 -
                                         inv2 * (1.0 / 42.0 - inv2 / 30.0)))));
  return result;
}

namespace {

// Series for P(a, x), valid for x < a + 1.
double lower_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n <= 500; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * 1e-16)
      return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
  }
  throw NumericalError("incomplete gamma series failed to converge");
}

// Modified Lentz continued fraction for Q(a, x), valid for x >= a + 1.
double upper_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < 1e-16)
      return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
  }
  throw NumericalError("incomplete gamma continued fraction failed to converge");
}

}  // namespace

double reg_upper_inc_gamma(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0))
    throw NumericalError("reg_upper_inc_gamma requires a > 0, x >= 0");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - lower_series(a, x);
  return upper_cf(a, x);
}

double log_normal_pdf(double x, double mean, double sd) {
  double z = (x - mean) / sd;
  return -0.5 * z * z - std::log(sd) - 0.91893853320467274178;
}

double log_half_cauchy_pdf(double x, double scale) {
  if (!(x > 0.0)) return -std::numeric_limits<double>::infinity();
  double r = x / scale;
  return std::log(2.0 / M_PI) - std::log(scale) - std::log1p(r * r);
}

}  // namespace gbart
