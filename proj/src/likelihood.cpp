#include "gbart/likelihood.hpp"

#include <cmath>

#include "gbart/data.hpp"
#include "gbart/error.hpp"

namespace gbart {

double fd_gradient(const std::function<double(double)>& f, double x,
                   double delta) {
  double hi = f(x + delta);
  double lo = f(x - delta);
  if (!std::isfinite(hi) || !std::isfinite(lo))
    throw NumericalError("fd_gradient hit a non-finite function value");
  return (hi - lo) / (2.0 * delta);
}

double fd_hessian(const std::function<double(double)>& f, double x,
                  double delta) {
  double hi = f(x + delta);
  double mid = f(x);
  double lo = f(x - delta);
  if (!std::isfinite(hi) || !std::isfinite(mid) || !std::isfinite(lo))
    throw NumericalError("fd_hessian hit a non-finite function value");
  return (hi - 2.0 * mid + lo) / (delta * delta);
}

double LikelihoodFamily::score(double y, int observed, double lambda) const {
  return fd_gradient(
      [&](double l) { return log_density(y, observed, l); }, lambda,
      fd_delta_);
}

double LikelihoodFamily::observed_info(double y, int observed,
                                       double lambda) const {
  return -fd_hessian(
      [&](double l) { return log_density(y, observed, l); }, lambda,
      fd_delta_);
}

void LikelihoodFamily::score_and_obs_info(double y, int observed,
                                          double lambda, double* score_out,
                                          double* info_out) const {
  *score_out = score(y, observed, lambda);
  *info_out = observed_info(y, observed, lambda);
}

double LikelihoodFamily::fisher_info(double) const {
  throw NumericalError(name() + " has no closed-form Fisher information");
}

double LikelihoodFamily::survival(double, double) const {
  throw InputError(name() + " does not define a survival function");
}

void LikelihoodFamily::update_nuisance(const Dataset&,
                                       const std::vector<double>&, Rng&) {}

void LikelihoodFamily::set_nuisance(const std::vector<double>& values) {
  if (!values.empty())
    throw InputError(name() + " takes no nuisance parameters");
}

void LikelihoodFamily::validate(const Dataset& data) const {
  if (models_censoring() && data.delta.empty())
    throw InputError(name() + " requires a delta column (event indicator)");
}

namespace {

class FdWrappedFamily : public LikelihoodFamily {
 public:
  FdWrappedFamily(std::function<double(double, int, double)> log_density,
                  double delta, std::string name)
      : log_density_(std::move(log_density)), name_(std::move(name)) {
    fd_delta_ = delta;
  }

  std::string name() const override { return name_; }

  std::unique_ptr<LikelihoodFamily> clone() const override {
    return std::make_unique<FdWrappedFamily>(*this);
  }

  double log_density(double y, int observed, double lambda) const override {
    return log_density_(y, observed, lambda);
  }

 private:
  std::function<double(double, int, double)> log_density_;
  std::string name_;
};

}  // namespace

std::unique_ptr<LikelihoodFamily> wrap_with_fd(
    std::function<double(double y, int observed, double lambda)> log_density,
    double delta, const std::string& name) {
  return std::make_unique<FdWrappedFamily>(std::move(log_density), delta,
                                           name);
}

}  // namespace gbart
