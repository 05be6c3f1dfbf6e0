#ifndef GBART_MODELS_HPP
#define GBART_MODELS_HPP

#include <memory>
#include <string>
#include <vector>

#include "gbart/likelihood.hpp"

namespace gbart {

// hetvar configuration: mean link g and variance function V(m).
enum class MeanLink { kIdentity, kExp };
enum class VarianceFn { kConstant, kLinear, kQuadratic };  // 1, m, m^2

struct HetvarOptions {
  MeanLink link = MeanLink::kExp;
  VarianceFn variance = VarianceFn::kLinear;
};

MeanLink mean_link_from_name(const std::string& name);
VarianceFn variance_fn_from_name(const std::string& name);

// Y ~ Normal(lambda, sigma^2); sigma slice-sampled under half-Cauchy whose
// scale is set from the training outcome sd.
std::unique_ptr<LikelihoodFamily> make_gaussian_family(double sigma = 1.0,
                                                       double prior_scale = 1.0);
// Y in {0,1}, P(Y=1) = logistic(lambda).
std::unique_ptr<LikelihoodFamily> make_logistic_family();
// Y ~ Poisson(exp(lambda)).
std::unique_ptr<LikelihoodFamily> make_poisson_family();
// Y ~ Normal(g(lambda), phi V(g(lambda))); phi refreshed by its conjugate
// gamma on the precision.
std::unique_ptr<LikelihoodFamily> make_hetvar_family(
    HetvarOptions options = {}, double phi = 1.0);
// log Y = lambda + sigma * eps, eps standard logistic, right censoring.
std::unique_ptr<LikelihoodFamily> make_aft_loglogistic_family(
    double sigma = 1.0);
// log Y = lambda + sigma * eps, eps ~ log Gamma(alpha, alpha); derivatives
// deliberately take the finite-difference path.
std::unique_ptr<LikelihoodFamily> make_aft_gengamma_family(double sigma = 1.0,
                                                           double alpha = 1.0);
// Proportional-scale Weibull with shape k: S(t | lambda) = exp(-(t/e^lambda)^k).
std::unique_ptr<LikelihoodFamily> make_weibull_family(double k = 1.0);
// Y ~ Gamma(shape = exp(lambda), rate = beta).
std::unique_ptr<LikelihoodFamily> make_gamma_shape_family(double beta = 1.0);

struct FamilyOptions {
  HetvarOptions hetvar;
  double fd_delta = 1e-6;
};

// Lookup by model name: gaussian | logistic | poisson | hetvar |
// aft_loglogistic | aft_gengamma | weibull | gamma_shape.
// Throws InputError for anything else.
std::unique_ptr<LikelihoodFamily> make_family(const std::string& name,
                                              const FamilyOptions& options = {});

}  // namespace gbart

#endif
