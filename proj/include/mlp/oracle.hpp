#pragma once

// Reference solutions u(t, x) for catalogue problems.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mlp/problems.hpp"

namespace mlp::oracle {

enum class Method { closed_form, picard_quadrature, mc_baseline };

std::string to_string(Method m);

struct Reference {
  double value = 0.0;
  double ci_halfwidth = 0.0;  // 0 for exact references
  Method method = Method::closed_form;
  std::string provenance;
};

/// heat-quadratic:  u(t,x) = |x|^2 + d (T - t)
/// linear-reaction: u(t,x) = e^{T-t} (|x|^2 + d (T - t))
/// (quadratic ansatz alpha(t)|x|^2 + beta(t): alpha' = -alpha, beta' = -beta - d alpha,
/// alpha(T) = 1, beta(T) = 0). Throws std::invalid_argument for other problems.
Reference closed_form(const Problem& problem, double t, std::span<const double> x);

/// Nodes and weights of n-point Gauss-Hermite quadrature for the weight exp(-z^2).
struct GaussHermite {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussHermite gauss_hermite(int n);

struct QuadratureOptions {
  int time_cells = 64;         // uniform cells over [t, T]; must be even
  int space_points = 129;      // per time layer; must be odd and >= 5
  double window_sigmas = 6.0;  // half-width of each layer's grid in units of sigma sqrt(T - t)
};

/// Values u_1(t,x), ..., u_depth(t,x) of the Picard iterates u_{k+1} = Phi(u_k),
/// u_0 = 0, computed on a space-time grid: Gaussian transition expectations by
/// Gauss-Hermite quadrature, time integrals by composite Simpson (3/8 rule on an
/// odd tail), cubic Lagrange interpolation in space.
/// Requires d = 1 and constant coefficients.
std::vector<double> picard_quadrature_iterates(const Problem& problem, double t, double x,
                                               int depth, int nodes,
                                               const QuadratureOptions& opts = {});

/// The depth-th iterate. ci_halfwidth = |v_K - v_{K/2}| / 15 (time-grid Richardson
/// estimate) + |u_depth - u_{depth-1}| (Picard remainder estimate).
Reference picard_quadrature_1d(const Problem& problem, double t, double x, int depth, int nodes,
                               const QuadratureOptions& opts = {});

struct Budget {
  int n = 5;
  std::uint64_t M = 5;
  std::uint64_t N = 512;
  std::size_t replications = 64;
};

struct Baseline {
  Reference reference;
  bool from_cache = false;
  std::filesystem::path cache_file;
};

/// Mean of `replications` independent MLP estimates U_{n,M} (root seeds seed, seed+1, ...)
/// with ci_halfwidth = 2.58 SE. Persisted under `cache_dir` keyed by (problem, t, x,
/// budget, seed) and reloaded bit-identically; an entry failing its checksum is recomputed.
Baseline mc_baseline(const Problem& problem, double t, std::span<const double> x,
                     const Budget& budget, std::uint64_t seed,
                     const std::filesystem::path& cache_dir, unsigned threads = 0);

}  // namespace mlp::oracle
