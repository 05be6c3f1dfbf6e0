#ifndef GBART_SIMULATE_HPP
#define GBART_SIMULATE_HPP

#include <cstdint>
#include <string>

#include "gbart/data.hpp"
#include "gbart/engine.hpp"

namespace gbart {

// 10 sin(pi x1 x2) + 20 (x3 - 1/2)^2 + 10 x4 + 5 x5; needs at least five
// coordinates, the rest are noise features.
double friedman(const double* x, std::size_t p);

struct ScenarioOptions {
  std::size_t n = 0;        // 0 picks the scenario default
  std::size_t p = 0;        // 0 picks the scenario default
  std::size_t heldout = 500;
  std::uint64_t seed = 1;
  std::string aft = "loglogistic";  // loglogistic or gengamma
};

struct SimulatedScenario {
  std::string model;  // family name the scenario is meant to be fit with
  Dataset train;
  Dataset heldout;
  TruthRecord train_truth;
  TruthRecord heldout_truth;
};

// Scenarios: gaussian, logistic, hetpoisson, aft, gammashape.
SimulatedScenario simulate_scenario(const std::string& name,
                                    const ScenarioOptions& options);

}  // namespace gbart

#endif
