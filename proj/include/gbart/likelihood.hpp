#ifndef GBART_LIKELIHOOD_HPP
#define GBART_LIKELIHOOD_HPP

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "gbart/rng.hpp"

namespace gbart {

struct Dataset;

// Central difference (f(x+delta) - f(x-delta)) / (2 delta); throws
// NumericalError on a non-finite evaluation.
double fd_gradient(const std::function<double(double)>& f, double x,
                   double delta);

// Second difference (f(x+delta) - 2 f(x) + f(x-delta)) / delta^2.
double fd_hessian(const std::function<double(double)>& f, double x,
                  double delta);

// One outcome model f_eta(y | lambda). lambda is the forest fit on the
// linking scale; eta (nuisance) lives inside the family object and is
// refreshed once per Gibbs sweep. Families ignore `observed` unless they
// model censoring; survival families read y as a follow-up time with
// observed = 1 for events, 0 for right-censoring.
//
// Default score / observed_info are central finite differences of
// log_density with step fd_delta(), so a family is usable from its density
// alone; closed-form families override them.
class LikelihoodFamily {
 public:
  virtual ~LikelihoodFamily() = default;

  virtual std::string name() const = 0;
  virtual std::unique_ptr<LikelihoodFamily> clone() const = 0;

  virtual double log_density(double y, int observed, double lambda) const = 0;

  // d/dlambda log f
  virtual double score(double y, int observed, double lambda) const;
  // -d2/dlambda2 log f at the observed y
  virtual double observed_info(double y, int observed, double lambda) const;
  // Both at once; overridden where sharing evaluations pays.
  virtual void score_and_obs_info(double y, int observed, double lambda,
                                  double* score_out, double* info_out) const;

  virtual bool has_fisher_info() const { return false; }
  virtual double fisher_info(double /*lambda*/) const;

  virtual bool models_censoring() const { return false; }
  // S_T(t | lambda) under the current nuisance; survival families only.
  virtual bool has_survival() const { return false; }
  virtual double survival(double t, double lambda) const;

  // Model-specific mean-scale summary of lambda (probability, mean, ...).
  virtual double predict_transform(double lambda) const { return lambda; }

  // One MCMC refresh of eta given the full fit; default: no nuisance.
  virtual void update_nuisance(const Dataset& data,
                               const std::vector<double>& fit, Rng& rng);
  // Prior density of the current nuisance, for the log-posterior trace.
  virtual double log_nuisance_prior() const { return 0.0; }

  virtual std::vector<double> nuisance() const { return {}; }
  virtual std::vector<std::string> nuisance_names() const { return {}; }
  virtual void set_nuisance(const std::vector<double>& values);

  // Outcome-domain checks; throws InputError naming the first bad row.
  virtual void validate(const Dataset& data) const;

  double fd_delta() const { return fd_delta_; }
  void set_fd_delta(double delta) { fd_delta_ = delta; }

 protected:
  double fd_delta_ = 1e-6;
};

// Family defined by a log-density alone; derivatives take the finite
// difference path, bit-identical to any family using the defaults with the
// same delta.
std::unique_ptr<LikelihoodFamily> wrap_with_fd(
    std::function<double(double y, int observed, double lambda)> log_density,
    double delta, const std::string& name = "fd_wrapped");

}  // namespace gbart

#endif
