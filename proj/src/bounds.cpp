#include "mlp/bounds.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace mlp::bounds {

void BoundParams::check() const {
  if (!(b >= 1.0 && c >= 1.0 && beta >= 1.0 && p >= 2.0 * beta && T > 0.0 && phi_x >= 1.0)) {
    throw std::domain_error(
        "BoundParams: need b, c, beta >= 1, p >= 2 beta, T > 0 and phi(x) >= 1");
  }
}

double log_error_bound(int n, std::uint64_t M, const BoundParams& bp) {
  if (n < 0 || M < 1) {
    throw std::domain_error("error_bound: need n >= 0 and M >= 1");
  }
  bp.check();
  const double logM = std::log(static_cast<double>(M));
  const double Md = static_cast<double>(M);
  const double first = 2.0 * n * bp.c * bp.T + Md / 2.0 - 0.5 * n * logM;
  const double second = -0.5 * Md * logM;
  const double hi = std::max(first, second);
  const double log_prefactor = hi + std::log(std::exp(first - hi) + std::exp(second - hi));
  return log_prefactor + std::log(12.0 * bp.b * bp.c * bp.c) +
         (bp.beta + 1.0) / bp.p * std::log(bp.phi_x) + 9.0 * bp.c * bp.c * bp.c * bp.T;
}

double error_bound(int n, std::uint64_t M, const BoundParams& bp) {
  return std::exp(log_error_bound(n, M, bp));
}

double total_cost_bound(int n, double weight_m, double weight_g, double weight_f) {
  if (n < 1) {
    throw std::domain_error("total_cost_bound: need n >= 1");
  }
  const double weights = 3.0 * weight_m + weight_g + 2.0 * weight_f;
  return 12.0 * weights * std::pow(36.0, n) * std::pow(static_cast<double>(n), 2.0 * n);
}

std::vector<double> gronwall_discrete(std::span<const double> alphas, double beta) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw std::domain_error("gronwall_discrete: beta must be finite and nonnegative");
  }
  for (double a : alphas) {
    if (!(a >= 0.0) || !std::isfinite(a)) {
      throw std::domain_error("gronwall_discrete: alphas must be finite and nonnegative");
    }
  }
  const std::size_t len = alphas.size();
  std::vector<double> powers(len, 1.0);
  for (std::size_t j = 1; j < len; ++j) {
    powers[j] = powers[j - 1] * (1.0 + beta);
  }
  std::vector<double> gamma(len);
  for (std::size_t n = 0; n < len; ++n) {
    double sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      sum += powers[n - k - 1] * alphas[k];
    }
    gamma[n] = alphas[n] + beta * sum;
  }
  return gamma;
}

double gronwall_mlp(double a, double b, double T, double tau, double p, std::uint64_t M,
                    int N, double sup_f0) {
  if (!(tau >= 0.0 && tau <= T) || !(p >= 1.0) || M < 1 || N < 1) {
    throw std::domain_error("gronwall_mlp: need 0 <= tau <= T, p >= 1, M >= 1, N >= 1");
  }
  if (!std::isfinite(sup_f0) || !std::isfinite(a) || !std::isfinite(b)) {
    throw std::domain_error("gronwall_mlp: inputs must be finite");
  }
  const double Md = static_cast<double>(M);
  const double spread = b * std::pow(T - tau, 1.0 / p);
  return (a + spread * sup_f0) * std::exp(std::pow(Md, p / 2.0) / p) * std::pow(Md, -N / 2.0) *
         std::pow(1.0 + spread, N - 1);
}

double perturbation_bound(double L, double rho, double p, double q, double eta, double T,
                          double t, double phi_x, double psi_tx, double delta) {
  if (!(T > 0.0) || !(t >= 0.0 && t <= T) || !(p > 0.0 && q > 0.0) ||
      !(1.0 / p + 1.0 / q <= 1.0)) {
    throw std::domain_error(
        "perturbation_bound: need T > 0, 0 <= t <= T, p, q > 0, 1/p + 1/q <= 1");
  }
  const double rate = L + rho / p + std::pow(eta, 1.0 / q) * L;
  return 4.0 * (1.0 + L * T) / std::sqrt(T) * std::exp(rate * (T - t)) *
         std::pow(phi_x, 1.0 / p) * std::pow(psi_tx, 1.0 / q) * delta;
}

namespace {
double squared_norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}
}  // namespace

double lyapunov_phi(std::span<const double> x, double a) {
  return 2.0 * a + 2.0 * squared_norm(x);
}

double lyapunov_first_derivative(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return 4.0 * s;
}

double lyapunov_first_derivative_bound(std::span<const double> x, std::span<const double> y,
                                       double a) {
  return 4.0 * std::sqrt(lyapunov_phi(x, a)) * std::sqrt(squared_norm(y));
}

double lyapunov_second_derivative(std::span<const double> y) {
  return 4.0 * squared_norm(y);
}

}  // namespace mlp::bounds
