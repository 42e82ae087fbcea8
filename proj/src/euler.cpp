#include "mlp/euler.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mlp/bounds.hpp"

namespace mlp {
namespace {

double grid_time(double T, std::uint64_t N, std::uint64_t k) {
  return k >= N ? T : static_cast<double>(k) * (T / static_cast<double>(N));
}

std::uint64_t clamp_index(double raw, std::uint64_t N) {
  if (!(raw > 0.0)) return 0;
  const double f = std::floor(raw);
  return f >= static_cast<double>(N) ? N : static_cast<std::uint64_t>(f);
}

// Smallest k with grid_time(k) > t, or N + 1 if none.
std::uint64_t first_after(double T, std::uint64_t N, double t) {
  std::uint64_t k = clamp_index(t * static_cast<double>(N) / T, N);
  while (k <= N && grid_time(T, N, k) <= t) ++k;
  while (k > 0 && grid_time(T, N, k - 1) > t) --k;
  return k;
}

// Largest k with grid_time(k) <= s.
std::uint64_t last_at_or_before(double T, std::uint64_t N, double s) {
  std::uint64_t k = clamp_index(s * static_cast<double>(N) / T, N);
  while (k < N && grid_time(T, N, k + 1) <= s) ++k;
  while (k > 0 && grid_time(T, N, k) > s) --k;
  return k;
}

void check_times(double T, double t, double s) {
  if (!(t >= 0.0 && t <= s && s <= T)) {
    throw std::domain_error("Euler path needs 0 <= t <= s <= T");
  }
}

template <typename Visit>
void for_each_update_time(double T, std::uint64_t N, double t, double s, Visit&& visit) {
  if (s == t) return;
  const std::uint64_t k0 = first_after(T, N, t);
  const std::uint64_t k1 = last_at_or_before(T, N, s);
  double last = t;
  for (std::uint64_t k = k0; k <= k1 && k <= N; ++k) {
    last = grid_time(T, N, k);
    visit(last);
  }
  if (s > last) visit(s);
}

}  // namespace

std::uint64_t euler_step_count(double T, std::uint64_t N, double t, double s) {
  check_times(T, t, s);
  std::uint64_t count = 0;
  for_each_update_time(T, N, t, s, [&](double) { ++count; });
  return count;
}

std::vector<double> euler_update_times(double T, std::uint64_t N, double t, double s) {
  check_times(T, t, s);
  std::vector<double> times;
  for_each_update_time(T, N, t, s, [&](double tau) { times.push_back(tau); });
  return times;
}

PathResult simulate(const Problem& problem, const EulerConfig& cfg, RandomStream& stream,
                    double t, std::span<const double> x, double s) {
  check_times(problem.T, t, s);
  if (cfg.steps < 1) {
    throw std::invalid_argument("EulerConfig: steps must be >= 1");
  }
  if (x.size() != problem.d) {
    throw std::invalid_argument("Euler start point has wrong dimension");
  }
  if (!stream.uniform_drawn()) {
    throw StreamMisuse("Euler paths start after the stream's uniform draw");
  }
  const std::size_t d = problem.d;
  const std::size_t m = problem.m;
  thread_local std::vector<double> drift, diffusion, z;
  drift.resize(d);
  diffusion.resize(d * m);
  z.resize(m);

  PathResult result;
  result.state.assign(x.begin(), x.end());
  std::vector<double>& y = result.state;
  double prev = t;
  for_each_update_time(problem.T, cfg.steps, t, s, [&](double tau) {
    const double dt = tau - prev;
    const double sqrt_dt = std::sqrt(dt);
    problem.drift(y, drift);
    problem.diffusion(y, diffusion);
    stream.draw_gaussians(z);
    for (std::size_t i = 0; i < d; ++i) {
      double noise = 0.0;
      const double* row = diffusion.data() + i * m;
      for (std::size_t j = 0; j < m; ++j) noise += row[j] * z[j];
      y[i] += drift[i] * dt + sqrt_dt * noise;
    }
    prev = tau;
    ++result.steps_used;
  });
  result.gaussians_used = result.steps_used * m;
  return result;
}

bool LyapunovCheck::holds() const {
  if (empirical_mean <= bound) return true;
  return empirical_mean - 3.0 * standard_error <= bound;
}

LyapunovCheck lyapunov_check(const Problem& problem, const EulerConfig& cfg, double t,
                             std::span<const double> x, double s, std::size_t paths,
                             std::uint64_t seed) {
  if (paths == 0) {
    throw std::invalid_argument("lyapunov_check: paths must be >= 1");
  }
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t j = 0; j < paths; ++j) {
    RandomStream stream = stream_for(seed, ThetaIndex{static_cast<std::int64_t>(j)});
    stream.draw_uniform();
    const PathResult path = simulate(problem, cfg, stream, t, x, s);
    const double v = problem_phi(problem, path.state);
    sum += v;
    sum_sq += v * v;
  }
  const double n = static_cast<double>(paths);
  LyapunovCheck out;
  out.empirical_mean = sum / n;
  if (paths > 1) {
    const double var = std::max(0.0, (sum_sq - n * out.empirical_mean * out.empirical_mean) / (n - 1.0));
    out.standard_error = std::sqrt(var / n);
  }
  const double c = problem.coeff_lip;
  out.bound = std::exp(2.0 * c * c * c * (s - t)) * problem_phi(problem, x);
  return out;
}

}  // namespace mlp
