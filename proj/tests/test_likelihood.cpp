#include <cmath>
#include <memory>

#include "doctest.h"
#include "gbart/error.hpp"
#include "gbart/likelihood.hpp"
#include "gbart/models.hpp"
#include "gbart/special_functions.hpp"

using namespace gbart;

TEST_SUITE("likelihood") {

TEST_CASE("central differences on smooth functions") {
  const double delta = 1e-6;
  auto square = [](double x) { return x * x; };
  CHECK(std::fabs(fd_gradient(square, 3.0, delta) - 6.0) < 1e-4);
  CHECK(std::fabs(fd_hessian(square, 3.0, delta) - 2.0) < 1e-3);

  auto constant = [](double) { return 4.25; };
  CHECK(fd_gradient(constant, 0.7, delta) == 0.0);
  CHECK(fd_hessian(constant, 0.7, delta) == 0.0);

  // d/dl log Gamma(exp(l)) = exp(l) psi(exp(l)); at l = 0 this is psi(1).
  auto curved = [](double l) { return log_gamma_fn(std::exp(l)); };
  CHECK(std::fabs(fd_gradient(curved, 0.0, delta) - digamma(1.0)) < 1e-4);
}

TEST_CASE("non-finite evaluations raise a numerical error") {
  auto log_fn = [](double x) { return std::log(x); };
  // The left stencil point falls below zero.
  CHECK_THROWS_AS(fd_gradient(log_fn, 1e-7, 1e-6), NumericalError);
  CHECK_THROWS_AS(fd_hessian(log_fn, 1e-7, 1e-6), NumericalError);
}

TEST_CASE("density-only family recovers closed-form derivatives") {
  auto gaussian_logf = [](double y, int, double lambda) {
    return log_normal_pdf(y, lambda, 1.0);
  };
  // A wider step keeps the second-difference roundoff well under the check
  // tolerance across the whole grid.
  auto wrapped = wrap_with_fd(gaussian_logf, 1e-5, "fd_gaussian");
  CHECK(wrapped->name() == "fd_gaussian");
  for (double lambda = -3.0; lambda <= 3.0; lambda += 0.5) {
    double y = 0.8;
    CHECK(std::fabs(wrapped->score(y, 1, lambda) - (y - lambda)) < 1e-4);
    CHECK(std::fabs(wrapped->observed_info(y, 1, lambda) - 1.0) < 1e-3);
  }
}

TEST_CASE("linear log-density has zero curvature") {
  auto linear = wrap_with_fd(
      [](double y, int, double lambda) { return y * lambda - 2.0; }, 1e-6);
  CHECK(std::fabs(linear->observed_info(1.5, 1, 0.3)) < 1e-3);
  CHECK(std::fabs(linear->score(1.5, 1, 0.3) - 1.5) < 1e-4);
}

TEST_CASE("wrapping a family's density reproduces its difference path") {
  // The log-gamma AFT family takes the default finite-difference derivatives,
  // so a wrapper around its density with the same step must agree exactly.
  auto family = make_aft_gengamma_family(0.8, 1.7);
  auto wrapped = wrap_with_fd(
      [&](double y, int observed, double lambda) {
        return family->log_density(y, observed, lambda);
      },
      family->fd_delta());
  for (double lambda : {-1.5, -0.4, 0.0, 0.9, 2.0}) {
    for (int observed : {0, 1}) {
      double y = 1.3;
      CHECK(wrapped->score(y, observed, lambda) ==
            family->score(y, observed, lambda));
      CHECK(wrapped->observed_info(y, observed, lambda) ==
            family->observed_info(y, observed, lambda));
      double s1, i1, s2, i2;
      wrapped->score_and_obs_info(y, observed, lambda, &s1, &i1);
      family->score_and_obs_info(y, observed, lambda, &s2, &i2);
      CHECK(s1 == s2);
      CHECK(i1 == i2);
    }
  }
}

TEST_CASE("paired derivative call matches the separate calls") {
  auto wrapped = wrap_with_fd(
      [](double y, int, double lambda) {
        return -0.5 * (y - lambda) * (y - lambda);
      },
      1e-6);
  double s, i;
  wrapped->score_and_obs_info(0.3, 1, -0.2, &s, &i);
  CHECK(s == wrapped->score(0.3, 1, -0.2));
  CHECK(i == wrapped->observed_info(0.3, 1, -0.2));
}

TEST_CASE("base family surface") {
  auto wrapped = wrap_with_fd(
      [](double, int, double) { return 0.0; }, 1e-6);
  CHECK_FALSE(wrapped->has_fisher_info());
  CHECK_THROWS_AS(wrapped->fisher_info(0.0), NumericalError);
  CHECK_FALSE(wrapped->has_survival());
  CHECK_THROWS_AS(wrapped->survival(1.0, 0.0), InputError);
  CHECK(wrapped->nuisance().empty());
  CHECK(wrapped->nuisance_names().empty());
  CHECK_NOTHROW(wrapped->set_nuisance({}));
  CHECK_THROWS_AS(wrapped->set_nuisance({1.0}), InputError);
  CHECK(wrapped->predict_transform(0.37) == 0.37);
  CHECK(wrapped->log_nuisance_prior() == 0.0);
}

TEST_CASE("step size is adjustable per family") {
  auto family = make_aft_gengamma_family();
  CHECK(family->fd_delta() == doctest::Approx(1e-6));
  family->set_fd_delta(1e-5);
  CHECK(family->fd_delta() == doctest::Approx(1e-5));
}

}  // TEST_SUITE
