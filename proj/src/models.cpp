#include "gbart/models.hpp"

#include <cmath>
#include <limits>

#include "gbart/data.hpp"
#include "gbart/error.hpp"
#include "gbart/slice.hpp"
#include "gbart/special_functions.hpp"

namespace gbart {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// All scalar nuisances are refreshed by slice sampling on the log scale;
// width 1, step-out budget 50.
constexpr double kNuisanceSliceWidth = 1.0;
constexpr int kNuisanceSliceSteps = 50;

double total_log_density(const LikelihoodFamily& family, const Dataset& data,
                         const std::vector<double>& fit) {
  double total = 0.0;
  for (std::size_t i = 0; i < data.n; ++i) {
    int observed = data.has_delta() ? static_cast<int>(data.delta[i]) : 1;
    total += family.log_density(data.y[i], observed, fit[i]);
  }
  return total;
}

void check_finite_outcomes(const Dataset& data, const std::string& family) {
  for (std::size_t i = 0; i < data.n; ++i)
    if (!std::isfinite(data.y[i]))
      throw InputError(family + ": row " + std::to_string(i + 1) +
                       ": non-finite outcome");
}

void check_positive_outcomes(const Dataset& data, const std::string& family) {
  check_finite_outcomes(data, family);
  for (std::size_t i = 0; i < data.n; ++i)
    if (!(data.y[i] > 0.0))
      throw InputError(family + ": row " + std::to_string(i + 1) +
                       ": outcome must be positive");
}

class GaussianFamily : public LikelihoodFamily {
 public:
  GaussianFamily(double sigma, double prior_scale)
      : sigma_(sigma), prior_scale_(prior_scale) {}

  std::string name() const override { return "gaussian"; }
  std::unique_ptr<LikelihoodFamily> clone() const override {
    return std::make_unique<GaussianFamily>(*this);
  }

  double log_density(double y, int, double lambda) const override {
    return log_normal_pdf(y, lambda, sigma_);
  }
  double score(double y, int, double lambda) const override {
    return (y - lambda) / (sigma_ * sigma_);
  }
  double observed_info(double, int, double) const override {
    return 1.0 / (sigma_ * sigma_);
  }
  void score_and_obs_info(double y, int, double lambda, double* score_out,
                          double* info_out) const override {
    *score_out = (y - lambda) / (sigma_ * sigma_);
    *info_out = 1.0 / (sigma_ * sigma_);
  }
  bool has_fisher_info() const override { return true; }
  double fisher_info(double) const override { return 1.0 / (sigma_ * sigma_); }

  void update_nuisance(const Dataset& data, const std::vector<double>& fit,
                       Rng& rng) override {
    double ssr = 0.0;
    for (std::size_t i = 0; i < data.n; ++i) {
      double r = data.y[i] - fit[i];
      ssr += r * r;
    }
    double n = static_cast<double>(data.n);
    auto log_target = [&](double u) {
      double s2 = std::exp(2.0 * u);
      return -0.5 * n * std::log(2.0 * M_PI * s2) - 0.5 * ssr / s2 +
             log_half_cauchy_pdf(std::exp(u), prior_scale_) + u;
    };
    sigma_ = std::exp(slice_sample(std::log(sigma_), log_target,
                                   kNuisanceSliceWidth, kNuisanceSliceSteps,
                                   rng));
  }
  double log_nuisance_prior() const override {
    return log_half_cauchy_pdf(sigma_, prior_scale_);
  }

  std::vector<double> nuisance() const override { return {sigma_}; }
  std::vector<std::string> nuisance_names() const override {
    return {"sigma"};
  }
  void set_nuisance(const std::vector<double>& values) override {
    if (values.size() != 1)
      throw InputError("gaussian expects one nuisance value (sigma)");
    sigma_ = values[0];
  }

  void validate(const Dataset& data) const override {
    check_finite_outcomes(data, name());
  }

 private:
  double sigma_;
  double prior_scale_;
};

class LogisticFamily : public LikelihoodFamily {
 public:
  std::string name() const override { return "logistic"; }
  std::unique_ptr<LikelihoodFamily> clone() const override {
    return std::make_unique<LogisticFamily>(*this);
  }

  double log_density(double y, int, double lambda) const override {
    return y * lambda - softplus(lambda);
  }
  double score(double y, int, double lambda) const override {
    return y - logistic(lambda);
  }
  double observed_info(double, int, double lambda) const override {
    double s = logistic(lambda);
    return s * (1.0 - s);
  }
  void score_and_obs_info(double y, int, double lambda, double* score_out,
                          double* info_out) const override {
    double s = logistic(lambda);
    *score_out = y - s;
    *info_out = s * (1.0 - s);
  }
  bool has_fisher_info() const override { return true; }
  double fisher_info(double lambda) const override {
    double s = logistic(lambda);
    return s * (1.0 - s);
  }

  double predict_transform(double lambda) const override {
    return logistic(lambda);
  }

  void validate(const Dataset& data) const override {
    for (std::size_t i = 0; i < data.n; ++i)
      if (data.y[i] != 0.0 && data.y[i] != 1.0)
        throw InputError("logistic: row " + std::to_string(i + 1) +
                         ": outcome must be 0 or 1");
  }
};

class PoissonFamily : public LikelihoodFamily {
 public:
  std::string name() const override { return "poisson"; }
  std::unique_ptr<LikelihoodFamily> clone() const override {
    return std::make_unique<PoissonFamily>(*this);
  }

  double log_density(double y, int, double lambda) const override {
    return y * lambda - std::exp(lambda) - std::lgamma(y + 1.0);
  }
  double score(double y, int, double lambda) const override {
    return y - std::exp(lambda);
  }
  double observed_info(double, int, double lambda) const override {
    return std::exp(lambda);
  }
  void score_and_obs_info(double y, int, double lambda, double* score_out,
                          double* info_out) const override {
    double rate = std::exp(lambda);
    *score_out = y - rate;
    *info_out = rate;
  }
  bool has_fisher_info() const override { return true; }
  double fisher_info(double lambda) const override {
    return std::exp(lambda);
  }

  double predict_transform(double lambda) const override {
    return std::exp(lambda);
  }

  void validate(const Dataset& data) const override {
    for (std::size_t i = 0; i < data.n; ++i)
      if (!(data.y[i] >= 0.0) || data.y[i] != std::floor(data.y[i]))
        throw InputError("poisson: row " + std::to_string(i + 1) +
                         ": outcome must be a nonnegative integer");
  }
};

class HetvarFamily : public LikelihoodFamily {
 public:
  HetvarFamily(HetvarOptions options, double phi)
      : options_(options), phi_(phi) {}

  std::string name() const override { return "hetvar"; }
  std::unique_ptr<LikelihoodFamily> clone() const override {
    return std::make_unique<HetvarFamily>(*this);
  }

  double log_density(double y, int, double lambda) const override {
    double m = mean(lambda);
    double v = phi_ * variance(m);
    if (!(v > 0.0)) return kNegInf;
    double r = y - m;
    return -0.5 * std::log(2.0 * M_PI * v) - 0.5 * r * r / v;
  }

  double score(double y, int, double lambda) const override {
    double m = mean(lambda);
    double v = variance(m);
    if (!(v > 0.0))
      throw NumericalError("hetvar: nonpositive variance at the evaluated fit");
    double vp = variance_prime(m);
    double r = y - m;
    double a = -0.5 * vp / v + 0.5 * vp * r * r / (phi_ * v * v) +
               r / (phi_ * v);
    return a * mean_prime(lambda);
  }

  bool has_fisher_info() const override { return true; }
  double fisher_info(double lambda) const override {
    double m = mean(lambda);
    double v = variance(m);
    if (!(v > 0.0))
      throw NumericalError("hetvar: nonpositive variance at the evaluated fit");
    double vp = variance_prime(m);
    double gp = mean_prime(lambda);
    return (0.5 * vp * vp / (v * v) + 1.0 / (phi_ * v)) * gp * gp;
  }

  // Precision tau = 1/phi gets its exact gamma conditional.
  void update_nuisance(const Dataset& data, const std::vector<double>& fit,
                       Rng& rng) override {
    double rate = 0.0;
    for (std::size_t i = 0; i < data.n; ++i) {
      double m = mean(fit[i]);
      double v = variance(m);
      if (!(v > 0.0))
        throw NumericalError("hetvar: nonpositive variance at row " +
                             std::to_string(i + 1));
      double r = data.y[i] - m;
      rate += 0.5 * r * r / v;
    }
    double tau = rng.gamma(0.5 * static_cast<double>(data.n), rate);
    phi_ = 1.0 / tau;
  }

  double predict_transform(double lambda) const override {
    return mean(lambda);
  }

  std::vector<double> nuisance() const override { return {phi_}; }
  std::vector<std::string> nuisance_names() const override { return {"phi"}; }
  void set_nuisance(const std::vector<double>& values) override {
    if (values.size() != 1)
      throw InputError("hetvar expects one nuisance value (phi)");
    phi_ = values[0];
  }

  void validate(const Dataset& data) const override {
    check_finite_outcomes(data, name());
  }

 private:
  double mean(double lambda) const {
    return options_.link == MeanLink::kExp ? std::exp(lambda) : lambda;
  }
  double mean_prime(double lambda) const {
    return options_.link == MeanLink::kExp ? std::exp(lambda) : 1.0;
  }
  double variance(double m) const {
    switch (options_.variance) {
      case VarianceFn::kConstant: return 1.0;
      case VarianceFn::kLinear: return m;
      case VarianceFn::kQuadratic: return m * m;
    }
    return 1.0;
  }
  double variance_prime(double m) const {
    switch (options_.variance) {
      case VarianceFn::kConstant: return 0.0;
      case VarianceFn::kLinear: return 1.0;
      case VarianceFn::kQuadratic: return 2.0 * m;
    }
    return 0.0;
  }

  HetvarOptions options_;
  double phi_;
};

class AftLogLogisticFamily : public LikelihoodFamily {
 public:
  explicit AftLogLogisticFamily(double sigma) : sigma_(sigma) {}

  std::string name() const override { return "aft_loglogistic"; }
  std::unique_ptr<LikelihoodFamily> clone() const override {
    return std::make_unique<AftLogLogisticFamily>(*this);
  }

  bool models_censoring() const override { return true; }
  bool has_survival() const override { return true; }

  double log_density(double y, int observed, double lambda) const override {
    double z = (std::log(y) - lambda) / sigma_;
    // log S_eps(z) = -softplus(z); log h_eps(z) = log s(z) = -softplus(-z).
    double value = -softplus(z);
    if (observed) value += -softplus(-z) - std::log(sigma_) - std::log(y);
    return value;
  }

  double score(double y, int observed, double lambda) const override {
    double s = logistic((std::log(y) - lambda) / sigma_);
    return (s - observed * (1.0 - s)) / sigma_;
  }
  double observed_info(double y, int observed, double lambda) const override {
    double s = logistic((std::log(y) - lambda) / sigma_);
    return (1.0 + observed) * s * (1.0 - s) / (sigma_ * sigma_);
  }
  void score_and_obs_info(double y, int observed, double lambda,
                          double* score_out, double* info_out) const override {
    double s = logistic((std::log(y) - lambda) / sigma_);
    *score_out = (s - observed * (1.0 - s)) / sigma_;
    *info_out = (1.0 + observed) * s * (1.0 - s) / (sigma_ * sigma_);
  }

  double survival(double t, double lambda) const override {
    if (!(t > 0.0)) return 1.0;
    return 1.0 - logistic((std::log(t) - lambda) / sigma_);
  }

  void update_nuisance(const Dataset& data, const std::vector<double>& fit,
                       Rng& rng) override {
    auto log_target = [&](double u) {
      AftLogLogisticFamily trial(std::exp(u));
      return total_log_density(trial, data, fit) +
             log_half_cauchy_pdf(std::exp(u), 1.0) + u;
    };
    sigma_ = std::exp(slice_sample(std::log(sigma_), log_target,
                                   kNuisanceSliceWidth, kNuisanceSliceSteps,
                                   rng));
  }
  double log_nuisance_prior() const override {
    return log_half_cauchy_pdf(sigma_, 1.0);
  }

  double predict_transform(double lambda) const override {
    return std::exp(lambda);  // median event time
  }

  std::vector<double> nuisance() const override { return {sigma_}; }
  std::vector<std::string> nuisance_names() const override {
    return {"sigma"};
  }
  void set_nuisance(const std::vector<double>& values) override {
    if (values.size() != 1)
      throw InputError("aft_loglogistic expects one nuisance value (sigma)");
    sigma_ = values[0];
  }

  void validate(const Dataset& data) const override {
    LikelihoodFamily::validate(data);
    check_positive_outcomes(data, name());
  }

 private:
  double sigma_;
};

class AftGenGammaFamily : public LikelihoodFamily {
 public:
  AftGenGammaFamily(double sigma, double alpha)
      : sigma_(sigma), alpha_(alpha) {}

  std::string name() const override { return "aft_gengamma"; }
  std::unique_ptr<LikelihoodFamily> clone() const override {
    return std::make_unique<AftGenGammaFamily>(*this);
  }

  bool models_censoring() const override { return true; }
  bool has_survival() const override { return true; }

  double log_density(double y, int observed, double lambda) const override {
    double z = (std::log(y) - lambda) / sigma_;
    if (z > 690.0) return kNegInf;  // alpha * e^z overflows; both terms -> 0
    if (observed)
      return alpha_ * std::log(alpha_) + alpha_ * z -
             alpha_ * std::exp(z) - std::lgamma(alpha_) - std::log(sigma_) -
             std::log(y);
    return std::log(reg_upper_inc_gamma(alpha_, alpha_ * std::exp(z)));
  }

  // Derivatives deliberately use the inherited finite-difference path; the
  // shared-evaluation override below keeps the same expressions.
  void score_and_obs_info(double y, int observed, double lambda,
                          double* score_out, double* info_out) const override {
    double d = fd_delta();
    double hi = log_density(y, observed, lambda + d);
    double mid = log_density(y, observed, lambda);
    double lo = log_density(y, observed, lambda - d);
    if (!std::isfinite(hi) || !std::isfinite(mid) || !std::isfinite(lo))
      throw NumericalError("aft_gengamma: non-finite density in derivatives");
    *score_out = (hi - lo) / (2.0 * d);
    *info_out = -(hi - 2.0 * mid + lo) / (d * d);
  }

  double survival(double t, double lambda) const override {
    if (!(t > 0.0)) return 1.0;
    double z = (std::log(t) - lambda) / sigma_;
    if (z > 690.0) return 0.0;
    return reg_upper_inc_gamma(alpha_, alpha_ * std::exp(z));
  }

  // Joint refresh as a two-coordinate slice sweep on (log sigma, log alpha);
  // priors half-Cauchy(0, 1) on sigma, Uniform(0, 40) on alpha.
  void update_nuisance(const Dataset& data, const std::vector<double>& fit,
                       Rng& rng) override {
    auto log_target = [&](double us, double ua) {
      double alpha = std::exp(ua);
      if (alpha >= 40.0) return kNegInf;
      AftGenGammaFamily trial(std::exp(us), alpha);
      return total_log_density(trial, data, fit) +
             log_half_cauchy_pdf(std::exp(us), 1.0) + us + ua;
    };
    double us = std::log(sigma_);
    double ua = std::log(alpha_);
    us = slice_sample(us, [&](double u) { return log_target(u, ua); },
                      kNuisanceSliceWidth, kNuisanceSliceSteps, rng);
    ua = slice_sample(ua, [&](double u) { return log_target(us, u); },
                      kNuisanceSliceWidth, kNuisanceSliceSteps, rng);
    sigma_ = std::exp(us);
    alpha_ = std::exp(ua);
  }
  double log_nuisance_prior() const override {
    double prior = log_half_cauchy_pdf(sigma_, 1.0);
    prior += alpha_ < 40.0 && alpha_ > 0.0 ? -std::log(40.0) : kNegInf;
    return prior;
  }

  double predict_transform(double lambda) const override {
    return std::exp(lambda);
  }

  std::vector<double> nuisance() const override { return {sigma_, alpha_}; }
  std::vector<std::string> nuisance_names() const override {
    return {"sigma", "alpha"};
  }
  void set_nuisance(const std::vector<double>& values) override {
    if (values.size() != 2)
      throw InputError("aft_gengamma expects two nuisance values (sigma, alpha)");
    sigma_ = values[0];
    alpha_ = values[1];
  }

  void validate(const Dataset& data) const override {
    LikelihoodFamily::validate(data);
    check_positive_outcomes(data, name());
  }

 private:
  double sigma_;
  double alpha_;
};

class WeibullFamily : public LikelihoodFamily {
 public:
  explicit WeibullFamily(double k) : k_(k) {}

  std::string name() const override { return "weibull"; }
  std::unique_ptr<LikelihoodFamily> clone() const override {
    return std::make_unique<WeibullFamily>(*this);
  }

  bool models_censoring() const override { return true; }
  bool has_survival() const override { return true; }

  double log_density(double y, int observed, double lambda) const override {
    double w = std::exp(k_ * (std::log(y) - lambda));
    double value = -w;
    if (observed)
      value += std::log(k_) + (k_ - 1.0) * std::log(y) - k_ * lambda;
    return value;
  }

  double score(double y, int observed, double lambda) const override {
    double w = std::exp(k_ * (std::log(y) - lambda));
    return k_ * (w - observed);
  }
  double observed_info(double y, int, double lambda) const override {
    double w = std::exp(k_ * (std::log(y) - lambda));
    return k_ * k_ * w;
  }
  void score_and_obs_info(double y, int observed, double lambda,
                          double* score_out, double* info_out) const override {
    double w = std::exp(k_ * (std::log(y) - lambda));
    *score_out = k_ * (w - observed);
    *info_out = k_ * k_ * w;
  }

  double survival(double t, double lambda) const override {
    if (!(t > 0.0)) return 1.0;
    return std::exp(-std::exp(k_ * (std::log(t) - lambda)));
  }

  void update_nuisance(const Dataset& data, const std::vector<double>& fit,
                       Rng& rng) override {
    auto log_target = [&](double u) {
      WeibullFamily trial(std::exp(u));
      return total_log_density(trial, data, fit) +
             log_half_cauchy_pdf(std::exp(u), 1.0) + u;
    };
    k_ = std::exp(slice_sample(std::log(k_), log_target, kNuisanceSliceWidth,
                               kNuisanceSliceSteps, rng));
  }
  double log_nuisance_prior() const override {
    return log_half_cauchy_pdf(k_, 1.0);
  }

  double predict_transform(double lambda) const override {
    return std::exp(lambda);
  }

  std::vector<double> nuisance() const override { return {k_}; }
  std::vector<std::string> nuisance_names() const override { return {"k"}; }
  void set_nuisance(const std::vector<double>& values) override {
    if (values.size() != 1)
      throw InputError("weibull expects one nuisance value (k)");
    k_ = values[0];
  }

  void validate(const Dataset& data) const override {
    LikelihoodFamily::validate(data);
    check_positive_outcomes(data, name());
  }

 private:
  double k_;
};

class GammaShapeFamily : public LikelihoodFamily {
 public:
  explicit GammaShapeFamily(double beta) : beta_(beta) {}

  std::string name() const override { return "gamma_shape"; }
  std::unique_ptr<LikelihoodFamily> clone() const override {
    return std::make_unique<GammaShapeFamily>(*this);
  }

  double log_density(double y, int, double lambda) const override {
    double shape = std::exp(lambda);
    return shape * std::log(beta_) - std::lgamma(shape) +
           (shape - 1.0) * std::log(y) - beta_ * y;
  }
  double score(double y, int, double lambda) const override {
    double shape = std::exp(lambda);
    return shape * (std::log(beta_) - digamma(shape) + std::log(y));
  }
  double observed_info(double y, int observed, double lambda) const override {
    double shape = std::exp(lambda);
    return shape * shape * trigamma(shape) - score(y, observed, lambda);
  }
  void score_and_obs_info(double y, int, double lambda, double* score_out,
                          double* info_out) const override {
    double shape = std::exp(lambda);
    *score_out = shape * (std::log(beta_) - digamma(shape) + std::log(y));
    *info_out = shape * shape * trigamma(shape) - *score_out;
  }
  bool has_fisher_info() const override { return true; }
  double fisher_info(double lambda) const override {
    double shape = std::exp(lambda);
    return shape * shape * trigamma(shape);
  }

  void update_nuisance(const Dataset& data, const std::vector<double>& fit,
                       Rng& rng) override {
    auto log_target = [&](double u) {
      GammaShapeFamily trial(std::exp(u));
      return total_log_density(trial, data, fit) +
             log_half_cauchy_pdf(std::exp(u), 1.0) + u;
    };
    beta_ = std::exp(slice_sample(std::log(beta_), log_target,
                                  kNuisanceSliceWidth, kNuisanceSliceSteps,
                                  rng));
  }
  double log_nuisance_prior() const override {
    return log_half_cauchy_pdf(beta_, 1.0);
  }

  double predict_transform(double lambda) const override {
    return std::exp(lambda) / beta_;  // outcome mean shape/rate
  }

  std::vector<double> nuisance() const override { return {beta_}; }
  std::vector<std::string> nuisance_names() const override {
    return {"beta"};
  }
  void set_nuisance(const std::vector<double>& values) override {
    if (values.size() != 1)
      throw InputError("gamma_shape expects one nuisance value (beta)");
    beta_ = values[0];
  }

  void validate(const Dataset& data) const override {
    check_positive_outcomes(data, name());
  }

 private:
  double beta_;
};

}  // namespace

MeanLink mean_link_from_name(const std::string& name) {
  if (name == "identity") return MeanLink::kIdentity;
  if (name == "exp") return MeanLink::kExp;
  throw InputError("unknown hetvar link: " + name);
}

VarianceFn variance_fn_from_name(const std::string& name) {
  if (name == "constant") return VarianceFn::kConstant;
  if (name == "linear") return VarianceFn::kLinear;
  if (name == "quadratic") return VarianceFn::kQuadratic;
  throw InputError("unknown hetvar variance function: " + name);
}

std::unique_ptr<LikelihoodFamily> make_gaussian_family(double sigma,
                                                       double prior_scale) {
  return std::make_unique<GaussianFamily>(sigma, prior_scale);
}

std::unique_ptr<LikelihoodFamily> make_logistic_family() {
  return std::make_unique<LogisticFamily>();
}

std::unique_ptr<LikelihoodFamily> make_poisson_family() {
  return std::make_unique<PoissonFamily>();
}

std::unique_ptr<LikelihoodFamily> make_hetvar_family(HetvarOptions options,
                                                     double phi) {
  return std::make_unique<HetvarFamily>(options, phi);
}

std::unique_ptr<LikelihoodFamily> make_aft_loglogistic_family(double sigma) {
  return std::make_unique<AftLogLogisticFamily>(sigma);
}

std::unique_ptr<LikelihoodFamily> make_aft_gengamma_family(double sigma,
                                                           double alpha) {
  return std::make_unique<AftGenGammaFamily>(sigma, alpha);
}

std::unique_ptr<LikelihoodFamily> make_weibull_family(double k) {
  return std::make_unique<WeibullFamily>(k);
}

std::unique_ptr<LikelihoodFamily> make_gamma_shape_family(double beta) {
  return std::make_unique<GammaShapeFamily>(beta);
}

std::unique_ptr<LikelihoodFamily> make_family(const std::string& name,
                                              const FamilyOptions& options) {
  std::unique_ptr<LikelihoodFamily> family;
  if (name == "gaussian")
    family = make_gaussian_family();
  else if (name == "logistic")
    family = make_logistic_family();
  else if (name == "poisson")
    family = make_poisson_family();
  else if (name == "hetvar")
    family = make_hetvar_family(options.hetvar);
  else if (name == "aft_loglogistic")
    family = make_aft_loglogistic_family();
  else if (name == "aft_gengamma")
    family = make_aft_gengamma_family();
  else if (name == "weibull")
    family = make_weibull_family();
  else if (name == "gamma_shape")
    family = make_gamma_shape_family();
  else
    throw InputError("unknown model: " + name);
  family->set_fd_delta(options.fd_delta);
  return family;
}

}  // namespace gbart
