#include "gbart/simulate.hpp"

#include <cmath>

#include "gbart/error.hpp"
#include "gbart/rng.hpp"
#include "gbart/special_functions.hpp"

namespace gbart {

double friedman(const double* x, std::size_t p) {
  if (p < 5)
    throw InputError("friedman function needs at least five features");
  constexpr double kPi = 3.14159265358979323846;
  return 10.0 * std::sin(kPi * x[0] * x[1]) +
         20.0 * (x[2] - 0.5) * (x[2] - 0.5) + 10.0 * x[3] + 5.0 * x[4];
}

namespace {

Dataset blank_dataset(Rng& rng, std::size_t n, std::size_t p) {
  Dataset data;
  data.n = n;
  data.p = p;
  data.x.resize(n * p);
  for (double& v : data.x) v = rng.uniform();
  data.y.assign(n, 0.0);
  data.scaling.assign(p, ColumnScale{0.0, 1.0});
  return data;
}

// Knuth's product-of-uniforms method; exact and fast enough for the means
// used here (at most a few hundred).
std::size_t draw_poisson(Rng& rng, double mean) {
  double limit = std::exp(-mean);
  std::size_t count = 0;
  double product = rng.uniform();
  while (product > limit) {
    ++count;
    product *= rng.uniform();
  }
  return count;
}

double scaled_friedman(const double* x, std::size_t p) {
  return (friedman(x, p) - 14.0) / 5.0;
}

}  // namespace

SimulatedScenario simulate_scenario(const std::string& name,
                                    const ScenarioOptions& options) {
  std::size_t n = options.n;
  std::size_t p = options.p;
  SimulatedScenario scenario;
  Rng rng(options.seed);

  auto make_pair = [&](std::size_t default_n, std::size_t default_p) {
    if (n == 0) n = default_n;
    if (p == 0) p = default_p;
    scenario.train = blank_dataset(rng, n, p);
    scenario.heldout = blank_dataset(rng, options.heldout, p);
  };
  auto fill = [&](Dataset& data, TruthRecord& truth, auto&& generate) {
    truth.r0.resize(data.n);
    for (std::size_t i = 0; i < data.n; ++i)
      generate(data, truth, i, data.row(i));
  };

  if (name == "gaussian") {
    make_pair(500, 20);
    scenario.model = "gaussian";
    auto generate = [&](Dataset& data, TruthRecord& truth, std::size_t i,
                        const double* x) {
      truth.r0[i] = friedman(x, p);
      truth.mean.push_back(truth.r0[i]);
      data.y[i] = truth.r0[i] + rng.normal();
    };
    fill(scenario.train, scenario.train_truth, generate);
    fill(scenario.heldout, scenario.heldout_truth, generate);
  } else if (name == "logistic") {
    make_pair(500, 20);
    scenario.model = "logistic";
    auto generate = [&](Dataset& data, TruthRecord& truth, std::size_t i,
                        const double* x) {
      truth.r0[i] = scaled_friedman(x, p);
      double prob = logistic(truth.r0[i]);
      truth.mean.push_back(prob);
      data.y[i] = rng.uniform() < prob ? 1.0 : 0.0;
    };
    fill(scenario.train, scenario.train_truth, generate);
    fill(scenario.heldout, scenario.heldout_truth, generate);
  } else if (name == "hetpoisson") {
    make_pair(500, 10);
    scenario.model = "hetvar";
    auto generate = [&](Dataset& data, TruthRecord& truth, std::size_t i,
                        const double* x) {
      truth.r0[i] = 2.0 + scaled_friedman(x, p);
      double mean = std::exp(truth.r0[i]);
      truth.mean.push_back(mean);
      data.y[i] = static_cast<double>(draw_poisson(rng, mean));
    };
    fill(scenario.train, scenario.train_truth, generate);
    fill(scenario.heldout, scenario.heldout_truth, generate);
  } else if (name == "aft") {
    make_pair(500, 10);
    bool gengamma = options.aft == "gengamma";
    if (!gengamma && options.aft != "loglogistic")
      throw InputError("aft scenario: unknown error family \"" + options.aft +
                       "\"");
    scenario.model = gengamma ? "aft_gengamma" : "aft_loglogistic";
    double sigma0 = 1.0;
    double alpha0 = 1.0;
    auto draw_log_time = [&](double r0) {
      double eps;
      if (gengamma)
        eps = std::log(rng.gamma(alpha0, alpha0));
      else {
        double u = rng.uniform();
        eps = std::log(u / (1.0 - u));
      }
      return r0 + sigma0 * eps;
    };
    auto generate = [&](Dataset& data, TruthRecord& truth, std::size_t i,
                        const double* x) {
      truth.r0[i] = scaled_friedman(x, p);
      double t = std::exp(draw_log_time(truth.r0[i]));
      // Censoring times share the event-time distribution, so about half
      // the observations are censored at every covariate value.
      double c = std::exp(draw_log_time(truth.r0[i]));
      data.y[i] = std::min(t, c);
      data.delta[i] = t <= c ? 1.0 : 0.0;
    };
    scenario.train.delta.assign(scenario.train.n, 0.0);
    scenario.heldout.delta.assign(scenario.heldout.n, 0.0);
    fill(scenario.train, scenario.train_truth, generate);
    fill(scenario.heldout, scenario.heldout_truth, generate);
  } else if (name == "gammashape") {
    make_pair(100, 10);
    scenario.model = "gamma_shape";
    double beta0 = 1.0;
    auto generate = [&](Dataset& data, TruthRecord& truth, std::size_t i,
                        const double* x) {
      truth.r0[i] = 2.0 + scaled_friedman(x, p);
      double shape = std::exp(truth.r0[i]);
      truth.mean.push_back(shape / beta0);
      data.y[i] = rng.gamma(shape, beta0);
    };
    fill(scenario.train, scenario.train_truth, generate);
    fill(scenario.heldout, scenario.heldout_truth, generate);
  } else {
    throw InputError("unknown scenario \"" + name + "\"");
  }
  return scenario;
}

}  // namespace gbart
