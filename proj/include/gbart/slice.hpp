#ifndef GBART_SLICE_HPP
#define GBART_SLICE_HPP

#include <cmath>
#include <functional>

#include "gbart/rng.hpp"

namespace gbart {

// Univariate step-out slice update (Neal 2003, Figs. 3 and 5). The expansion
// budget is split randomly between the two sides so the capped step-out
// leaves the target invariant. Non-finite target values are treated as
// -infinity, which shrinks the interval back toward x0.
inline double slice_sample(double x0,
                           const std::function<double(double)>& log_target,
                           double width, int max_steps, Rng& rng) {
  double f0 = log_target(x0);
  if (!std::isfinite(f0)) return x0;
  double level = f0 - rng.exponential();

  double lower = x0 - width * rng.uniform();
  double upper = lower + width;
  int steps_left = static_cast<int>(rng.uniform() * max_steps);
  int steps_right = max_steps - 1 - steps_left;
  while (steps_left-- > 0 && log_target(lower) > level) lower -= width;
  while (steps_right-- > 0 && log_target(upper) > level) upper += width;

  for (int tries = 0; tries < 1000; ++tries) {
    double x1 = rng.uniform(lower, upper);
    if (log_target(x1) > level) return x1;
    if (x1 < x0)
      lower = x1;
    else
      upper = x1;
  }
  return x0;
}

}  // namespace gbart

#endif
