#pragma once

// Euler-Maruyama paths on the uniform grid kT/N, started at an arbitrary
// time t and stopped at an arbitrary time s in [t, T].
//
// Grid times are tau_k = k * (T / N) for k < N and tau_N = T exactly. The
// update points of a path are the grid times in (t, s] followed by s itself
// when s is not a grid time; each update freezes mu and sigma at the state
// reached at the previous update point.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mlp/problems.hpp"
#include "mlp/rng_tree.hpp"

namespace mlp {

struct EulerConfig {
  std::uint64_t steps = 1;  // N
};

struct PathResult {
  std::vector<double> state;
  std::uint64_t steps_used = 0;
  std::uint64_t gaussians_used = 0;
};

/// Simulates Y_{t,s} from Y_{t,t} = x. The stream must already have produced
/// its uniform. Throws std::domain_error unless 0 <= t <= s <= T.
PathResult simulate(const Problem& problem, const EulerConfig& cfg, RandomStream& stream,
                    double t, std::span<const double> x, double s);

/// Number of update points the path from t to s takes; depends only on (t, s, N, T).
std::uint64_t euler_step_count(double T, std::uint64_t N, double t, double s);

/// The update times of a path from t to s (excluding t itself).
std::vector<double> euler_update_times(double T, std::uint64_t N, double t, double s);

struct LyapunovCheck {
  double empirical_mean = 0.0;
  double standard_error = 0.0;
  double bound = 0.0;
  /// empirical_mean - 3 SE <= bound
  bool holds() const;
};

/// Monte Carlo estimate of E[phi(Y_{t,s})] against exp(2 c^3 (s - t)) phi(x).
/// Path j uses the stream of node (j) under `seed`.
LyapunovCheck lyapunov_check(const Problem& problem, const EulerConfig& cfg, double t,
                             std::span<const double> x, double s, std::size_t paths,
                             std::uint64_t seed);

}  // namespace mlp
