#ifndef GBART_ENGINE_HPP
#define GBART_ENGINE_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "gbart/data.hpp"
#include "gbart/likelihood.hpp"
#include "gbart/sampler.hpp"
#include "gbart/tree.hpp"

namespace gbart {

struct SamplerConfig {
  std::string model = "gaussian";
  std::string sampler = "rj";  // rj | conjugate (gaussian only)
  int num_trees = 50;
  double gamma = 0.95;
  double beta = 2.0;
  double k = 1.0;  // sigma_mu prior scale c = k / sqrt(num_trees)
  double xi = 1.0;
  double p_birth = 0.25;
  double p_death = 0.25;
  double p_change = 0.5;
  int iterations = 10000;
  int burn_in = 5000;
  int thin = 1;
  int chains = 1;
  std::uint64_t seed = 42;
  double fd_delta = 1e-6;
  std::string hetvar_link = "exp";
  std::string hetvar_variance = "linear";

  void validate() const;  // InputError on inconsistent settings
};

// Flat key=value file; '#' starts a comment. Unknown keys are errors.
SamplerConfig load_config(const std::string& path);
void config_set(SamplerConfig& config, const std::string& key,
                const std::string& value);

struct IterationRecord {
  int chain = 0;
  int iteration = 0;
  double log_posterior = 0.0;
  double log_likelihood = 0.0;
  double sigma_mu = 0.0;
  std::vector<double> nuisance;
  long birth_attempts = 0, birth_accepts = 0;
  long death_attempts = 0, death_accepts = 0;
  long change_attempts = 0, change_accepts = 0;
  int leaves = 0;
};

// Per-iteration diagnostics for every chain plus the kept (post burn-in,
// thinned) draws. Forest snapshots are only held in memory on request;
// fits at eval points and pointwise log-likelihoods are always recorded.
struct ChainTrace {
  std::string model;
  std::vector<std::string> nuisance_names;
  std::vector<IterationRecord> iterations;

  std::vector<double> kept_sigma_mu;
  std::vector<std::vector<double>> kept_nuisance;
  std::vector<std::vector<double>> kept_split_probs;
  std::vector<std::vector<double>> pointwise_loglik;  // [draw][train row]
  std::vector<std::vector<double>> eval_fit;          // [draw][eval row]
  std::vector<Forest> forests;

  int num_kept() const { return static_cast<int>(kept_sigma_mu.size()); }
};

struct RunOptions {
  const Dataset* eval_data = nullptr;  // rows to track fits at (X only)
  bool keep_forests = false;
  // Called for each kept draw; lets the CLI stream snapshots to disk.
  std::function<void(const Forest& forest, const LikelihoodFamily& family,
                     int chain, int kept_index)>
      forest_sink;
};

// Runs config.chains chains sequentially with streams mix_seed(seed, chain)
// and concatenates their kept draws in chain order. Initial state per chain:
// root-only trees with zero leaves, sigma_mu = k/sqrt(T), uniform split
// probabilities, family nuisance at its data-driven default.
ChainTrace run_chain(const SamplerConfig& config, const Dataset& data,
                     const RunOptions& options = {});

// Family configured as run_chain would build it for this data.
std::unique_ptr<LikelihoodFamily> make_family_for_data(
    const SamplerConfig& config, const Dataset& data);

struct PosteriorSummary {
  std::vector<double> mean, lower, upper;                      // r(x) scale
  std::vector<double> transform_mean, transform_lower, transform_upper;
};

// Posterior mean and central 95% interval per query row, on the fit scale
// and through the family's mean-scale transform (which may depend on the
// per-draw nuisance). Uses stored forests.
PosteriorSummary predict(const ChainTrace& trace,
                         const LikelihoodFamily& family, const Dataset& query);
// Same, for the rows passed as RunOptions::eval_data.
PosteriorSummary predict_at_evals(const ChainTrace& trace,
                                  const LikelihoodFamily& family);

struct SurvivalCurve {
  std::vector<double> times;
  std::vector<double> mean, lower, upper;
};

// Pointwise posterior summary of S(t | x) over the grid; survival families
// only. The eval variant reads fits for eval row `index`.
SurvivalCurve survival_curve(const ChainTrace& trace,
                             const LikelihoodFamily& family, const double* x,
                             const std::vector<double>& times);
SurvivalCurve survival_curve_at(const ChainTrace& trace,
                                const LikelihoodFamily& family, int index,
                                const std::vector<double>& times);

struct LpmlResult {
  double lpml = 0.0;
  std::vector<double> log_cpo;
};

// Conditional predictive ordinates via stable log-sum-exp over draws.
LpmlResult lpml(const std::vector<std::vector<double>>& pointwise_loglik);

struct TruthRecord {
  std::vector<double> r0;    // fit-scale truth, empty if unknown
  std::vector<double> mean;  // mean-scale truth, empty if unknown
};

TruthRecord load_truth(const std::string& path);
void save_truth(const TruthRecord& truth, const std::string& path);

struct HeldoutMetrics {
  std::vector<double> mse;        // mean (y - fit)^2 per draw
  std::vector<double> loglik;     // held-out log-likelihood per draw
  std::vector<double> rmse_r;     // vs truth.r0, when supplied
  std::vector<double> rmse_mean;  // vs truth.mean through the transform
};

// Per-draw held-out traces; fits come from eval_fit when it matches the
// held-out size, otherwise from stored forests.
HeldoutMetrics heldout_metrics(const ChainTrace& trace,
                               const LikelihoodFamily& family,
                               const Dataset& heldout,
                               const TruthRecord& truth = {});

// Var(log T | x) = sigma^2 * trigamma(alpha) under the log-gamma error.
double gengamma_variance(double sigma, double alpha);

void write_trace_csv(const ChainTrace& trace, const std::string& path);
void write_pointwise_csv(const ChainTrace& trace, const std::string& path);
std::vector<std::vector<double>> load_pointwise_csv(const std::string& path);

}  // namespace gbart

#endif
