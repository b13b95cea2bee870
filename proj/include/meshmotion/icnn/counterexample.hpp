#pragma once

#include <cstdint>
#include <vector>

namespace meshmotion::icnn {

// h(x, y) = max(max(x + y, 0), max(x - y, 0)).
double counterexample_target(double x, double y);
// ReLU(x + ReLU(y) + ReLU(-y)), an exact depth-2 form of h.
double counterexample_depth2_exact(double x, double y);

struct CounterexampleConfig {
  double k = 1.0;
  int grid = 100;          // grid x grid points on [-k, k]^2
  int units = 16;          // shallow width; the depth-2 net uses units/2 per layer
  int restarts = 10;
  int adam_steps = 400;
  int lm_steps = 100;      // Levenberg-Marquardt polish after Adam
  std::uint64_t seed = 1;
  int profile_points = 50;
};

struct CounterexampleReport {
  std::vector<double> shallow_sup;  // per restart
  std::vector<double> deep_sup;
  double shallow_best_sup = 0.0;
  double deep_best_sup = 0.0;
  double exact_depth2_sup = 0.0;
  // error of the best fits along (α, 0), α in (0, k]
  std::vector<double> profile_alpha;
  std::vector<double> profile_shallow;
  std::vector<double> profile_deep;
};

/// Least-squares fits of h on the grid by (i) Σ ReLU(w_i·x + b_i) (a
/// nonnegative shallow combination) and (ii) an unconstrained two-hidden-layer
/// ReLU net, each from `restarts` random initialisations. Reports sup-norm
/// errors over the grid.
CounterexampleReport counterexample_fit(const CounterexampleConfig& cfg);

}  // namespace meshmotion::icnn
