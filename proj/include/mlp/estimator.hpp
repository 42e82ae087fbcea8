#pragma once

// Full-history recursive multilevel Picard estimator U_{n,M}^theta(t, x)
// with Euler-Maruyama forward paths, and its exact cost ledger.

#include <cstddef>
#include <cstdint>
#include <span>

#include "mlp/problems.hpp"
#include "mlp/rng_tree.hpp"

namespace mlp {

struct MlpParams {
  int n = 1;
  std::uint64_t M = 1;
  /// Euler steps N over [0, T]; 0 selects the default M^M.
  std::uint64_t euler_steps = 0;
  std::uint64_t root_seed = 0;

  std::uint64_t resolved_steps() const;
  /// Throws std::invalid_argument on n < 0, M < 1 or an unrepresentable M^M / M^n.
  void check() const;
};

/// Weights (v, m, g, f): one scalar random draw, one Euler step (a mu and a
/// sigma evaluation), one g evaluation, one f evaluation.
struct CostWeights {
  double v = 1.0;
  double m = 1.0;
  double g = 1.0;
  double f = 1.0;
};

struct CostTally {
  std::uint64_t uniforms = 0;
  std::uint64_t gaussians = 0;
  std::uint64_t euler_steps = 0;
  std::uint64_t g_evals = 0;
  std::uint64_t f_evals = 0;

  CostTally& operator+=(const CostTally& other);
  double weighted(const CostWeights& w) const;
  bool is_zero() const;

  friend bool operator==(const CostTally&, const CostTally&) = default;
};

struct Estimate {
  double value = 0.0;
  CostTally cost;
};

/// U_{n,M}^theta(t, x). Node (theta, 0, -i) drives the i-th terminal path (its
/// uniform is drawn and discarded, and not tallied); node (theta, l, i) drives
/// the i-th level-l sample: its uniform sets R = t + (T - t) r, its Gaussians
/// the path to R, and its descendants the sub-estimate U_l; the correction
/// U_{l-1} lives under (theta, -l, i).
Estimate estimate(const Problem& problem, const MlpParams& params, const ThetaIndex& theta,
                  double t, std::span<const double> x);

/// Same as above, starting from an already derived stream key for theta.
Estimate estimate(const Problem& problem, const MlpParams& params, const StreamKey& theta_key,
                  double t, std::span<const double> x);

/// Right-hand side of the cost recursion
///   C_n = M^n (N d v + N m + g) 1{n >= 1}
///       + sum_{l<n} M^{n-l} ((N d + 1) v + N m + 2 f + C_l + C_{l-1}),
/// with C_k = 0 for k <= 0.
double cost_recursion_bound(int n, std::uint64_t M, std::size_t d, std::uint64_t N,
                            const CostWeights& w);

/// M^n, throwing std::overflow_error when it does not fit in 64 bits.
std::uint64_t checked_power(std::uint64_t M, int n);

}  // namespace mlp
