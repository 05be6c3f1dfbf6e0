#ifndef GBART_RNG_HPP
#define GBART_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "gbart/error.hpp"

namespace gbart {

// Splits one user seed into independent per-chain streams.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// All draws used by the sampler go through this wrapper so a (seed, chain)
// pair fully determines the chain.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform() {  // [0, 1)
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    double f = std::sqrt(-2.0 * std::log(s) / s);
    cached_ = v * f;
    have_cached_ = true;
    return u * f;
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  double exponential() { return -std::log(1.0 - uniform()); }

  // Marsaglia-Tsang; rate parameterization (mean = shape / rate).
  double gamma(double shape, double rate) {
    if (shape <= 0.0 || rate <= 0.0)
      throw NumericalError("gamma draw requires shape > 0 and rate > 0");
    if (shape < 1.0) {
      double u = uniform();
      while (u == 0.0) u = uniform();
      return gamma(shape + 1.0, rate) * std::pow(u, 1.0 / shape);
    }
    double d = shape - 1.0 / 3.0;
    double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
      if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
        return d * v / rate;
    }
  }

  // Index draw from unnormalized nonnegative weights.
  int categorical(const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (!(total > 0.0))
      throw NumericalError("categorical draw requires positive total weight");
    double u = uniform() * total;
    double acc = 0.0;
    for (std::size_t j = 0; j + 1 < weights.size(); ++j) {
      acc += weights[j];
      if (u < acc) return static_cast<int>(j);
    }
    return static_cast<int>(weights.size()) - 1;
  }

  std::vector<double> dirichlet(const std::vector<double>& alpha) {
    std::vector<double> draw(alpha.size());
    double total = 0.0;
    for (std::size_t j = 0; j < alpha.size(); ++j) {
      draw[j] = gamma(alpha[j], 1.0);
      total += draw[j];
    }
    for (double& d : draw) d /= total;
    return draw;
  }

  std::uint64_t integer(std::uint64_t n) {  // uniform on {0, ..., n-1}
    return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n;
  }

 private:
  std::mt19937_64 gen_;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

}  // namespace gbart

#endif
