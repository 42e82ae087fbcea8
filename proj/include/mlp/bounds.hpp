#pragma once

// Closed-form evaluators for the error, cost, Gronwall and perturbation
// bounds of the multilevel Picard method. All functions are pure.

#include <cstdint>
#include <span>
#include <vector>

namespace mlp::bounds {

struct BoundParams {
  double b = 1.0;
  double c = 1.0;
  double beta = 1.0;
  double p = 2.0;
  double T = 1.0;
  double phi_x = 1.0;

  /// Throws std::domain_error unless b, c, beta >= 1, p >= 2 beta, T > 0, phi_x >= 1.
  void check() const;
};

/// Root-mean-square error bound for U_{n,M}(t, x):
///   [exp(2ncT + M/2) M^{-n/2} + M^{-M/2}] * 12 b c^2 phi(x)^{(beta+1)/p} exp(9 c^3 T).
/// Evaluated in log space; returns +inf when the value exceeds the double range.
double error_bound(int n, std::uint64_t M, const BoundParams& bp);
double log_error_bound(int n, std::uint64_t M, const BoundParams& bp);

/// 12 (3m + g + 2f) 36^n n^{2n}; dominates sum_{k=1}^{n+1} C_{k,k}.
double total_cost_bound(int n, double weight_m, double weight_g, double weight_f);

/// gamma_n = alpha_n + beta * sum_{k<n} (1+beta)^{n-k-1} alpha_k, summed in
/// ascending k with powers built by repeated multiplication.
std::vector<double> gronwall_discrete(std::span<const double> alphas, double beta);

/// [a + b (T-tau)^{1/p} sup|f_0|] exp(M^{p/2}/p) M^{-N/2} [1 + b (T-tau)^{1/p}]^{N-1}
double gronwall_mlp(double a, double b, double T, double tau, double p, std::uint64_t M,
                    int N, double sup_f0);

/// 4 (1 + LT) T^{-1/2} exp((L + rho/p + eta^{1/q} L)(T - t)) phi^{1/p} psi^{1/q} delta.
/// Requires T > 0, 0 <= t <= T, p, q > 0 and 1/p + 1/q <= 1.
double perturbation_bound(double L, double rho, double p, double q, double eta, double T,
                          double t, double phi_x, double psi_tx, double delta);

/// phi(x) = 2a + 2|x|^2.
double lyapunov_phi(std::span<const double> x, double a);
/// phi'(x)(y) = 4 <x, y>.
double lyapunov_first_derivative(std::span<const double> x, std::span<const double> y);
/// Upper bound 4 phi(x)^{1/2} |y| for |phi'(x)(y)|.
double lyapunov_first_derivative_bound(std::span<const double> x, std::span<const double> y,
                                       double a);
/// phi''(x)(y, y) = 4 |y|^2 (independent of x).
double lyapunov_second_derivative(std::span<const double> y);

}  // namespace mlp::bounds
