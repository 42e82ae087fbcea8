#include "mlp/estimator.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "mlp/euler.hpp"

namespace mlp {

std::uint64_t checked_power(std::uint64_t M, int n) {
  if (n < 0) {
    throw std::invalid_argument("checked_power: negative exponent");
  }
  std::uint64_t out = 1;
  for (int k = 0; k < n; ++k) {
    if (M != 0 && out > std::numeric_limits<std::uint64_t>::max() / M) {
      throw std::overflow_error("M^n does not fit in 64 bits");
    }
    out *= M;
  }
  return out;
}

std::uint64_t MlpParams::resolved_steps() const {
  if (euler_steps != 0) return euler_steps;
  return checked_power(M, static_cast<int>(M));
}

void MlpParams::check() const {
  if (n < 0) throw std::invalid_argument("MlpParams: n must be >= 0");
  if (M < 1) throw std::invalid_argument("MlpParams: M must be >= 1");
  if (M > 64) throw std::invalid_argument("MlpParams: M must be <= 64");
  (void)resolved_steps();
  (void)checked_power(M, n);
}

CostTally& CostTally::operator+=(const CostTally& o) {
  uniforms += o.uniforms;
  gaussians += o.gaussians;
  euler_steps += o.euler_steps;
  g_evals += o.g_evals;
  f_evals += o.f_evals;
  return *this;
}

double CostTally::weighted(const CostWeights& w) const {
  return w.v * static_cast<double>(uniforms + gaussians) + w.m * static_cast<double>(euler_steps) +
         w.g * static_cast<double>(g_evals) + w.f * static_cast<double>(f_evals);
}

bool CostTally::is_zero() const { return *this == CostTally{}; }

namespace {

struct Recursion {
  const Problem& problem;
  std::uint64_t M;
  EulerConfig euler;

  Estimate run(int n, const StreamKey& key, double t, std::span<const double> x) const {
    Estimate out;
    if (n == 0) return out;
    const double T = problem.T;
    const double horizon = T - t;

    const std::uint64_t terminal_count = checked_power(M, n);
    double terminal_sum = 0.0;
    for (std::uint64_t i = 1; i <= terminal_count; ++i) {
      RandomStream stream(key.child(0, -static_cast<std::int64_t>(i)));
      stream.draw_uniform();
      const PathResult path = simulate(problem, euler, stream, t, x, T);
      terminal_sum += problem.terminal(path.state);
      out.cost.gaussians += path.gaussians_used;
      out.cost.euler_steps += path.steps_used;
      out.cost.g_evals += 1;
    }
    out.value = terminal_sum / static_cast<double>(terminal_count);

    for (int level = 0; level < n; ++level) {
      const std::uint64_t count = checked_power(M, n - level);
      double level_sum = 0.0;
      for (std::uint64_t i = 1; i <= count; ++i) {
        const auto label = static_cast<std::int64_t>(i);
        const StreamKey sample_key = key.child(level, label);
        RandomStream stream(sample_key);
        const double r = stream.draw_uniform();
        out.cost.uniforms += 1;
        double R = t + horizon * r;
        if (R > T) R = T;
        const PathResult path = simulate(problem, euler, stream, t, x, R);
        out.cost.gaussians += path.gaussians_used;
        out.cost.euler_steps += path.steps_used;

        const Estimate fine = run(level, sample_key, R, path.state);
        out.cost += fine.cost;
        level_sum += problem.nonlinearity(R, path.state, fine.value);
        out.cost.f_evals += 1;
        if (level >= 1) {
          const Estimate coarse = run(level - 1, key.child(-level, label), R, path.state);
          out.cost += coarse.cost;
          level_sum -= problem.nonlinearity(R, path.state, coarse.value);
          out.cost.f_evals += 1;
        }
      }
      out.value += horizon * level_sum / static_cast<double>(count);
    }
    return out;
  }
};

}  // namespace

Estimate estimate(const Problem& problem, const MlpParams& params, const StreamKey& theta_key,
                  double t, std::span<const double> x) {
  params.check();
  if (!(t >= 0.0 && t <= problem.T)) {
    throw std::domain_error("estimate: t outside [0, T]");
  }
  if (x.size() != problem.d) {
    throw std::invalid_argument("estimate: x has wrong dimension");
  }
  const Recursion rec{problem, params.M, EulerConfig{params.resolved_steps()}};
  return rec.run(params.n, theta_key, t, x);
}

Estimate estimate(const Problem& problem, const MlpParams& params, const ThetaIndex& theta,
                  double t, std::span<const double> x) {
  return estimate(problem, params, key_for(params.root_seed, theta), t, x);
}

double cost_recursion_bound(int n, std::uint64_t M, std::size_t d, std::uint64_t N,
                            const CostWeights& w) {
  if (n <= 0) return 0.0;
  const double Md = static_cast<double>(M);
  const double Nd = static_cast<double>(N);
  const double dd = static_cast<double>(d);
  // memo[k + 1] holds C_k for k = -1 .. n
  std::vector<double> memo(static_cast<std::size_t>(n) + 2, 0.0);
  auto C = [&](int k) { return k <= 0 ? 0.0 : memo[static_cast<std::size_t>(k) + 1]; };
  for (int k = 1; k <= n; ++k) {
    double value = std::pow(Md, k) * (Nd * dd * w.v + Nd * w.m + w.g);
    for (int level = 0; level < k; ++level) {
      value += std::pow(Md, k - level) *
               ((Nd * dd + 1.0) * w.v + Nd * w.m + 2.0 * w.f + C(level) + C(level - 1));
    }
    memo[static_cast<std::size_t>(k) + 1] = value;
  }
  return C(n);
}

}  // namespace mlp
