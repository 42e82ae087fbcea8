#pragma once

// Semilinear parabolic problems u_t + <mu, grad u> + 1/2 tr(sigma sigma^T Hess u) + f(t, x, u) = 0,
// u(T, .) = g, together with the regularity constants the error and cost
// analysis is stated in terms of, and a catalogue of built-in test problems.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mlp {

/// Half-width of the box [-h, h]^d on which catalogue constants are certified.
inline constexpr double kValidationBoxHalfWidth = 2.0;

struct ConstantCoefficients {
  std::vector<double> drift;      // length d
  std::vector<double> diffusion;  // d x m, row-major
};

struct Problem {
  std::string name;
  /// Name plus every resolved parameter; identifies the problem in caches and reports.
  std::string canonical;

  std::size_t d = 1;
  std::size_t m = 1;
  double T = 1.0;

  std::function<void(std::span<const double> x, std::span<double> out)> drift;
  /// Writes sigma(x) as a d x m row-major matrix.
  std::function<void(std::span<const double> x, std::span<double> out)> diffusion;
  std::function<double(std::span<const double> x)> terminal;
  std::function<double(double t, std::span<const double> x, double v)> nonlinearity;

  double lip_f = 0.0;        // L
  double coeff_lip = 1.0;    // c
  double growth_b = 1.0;     // b
  double growth_beta = 1.0;  // beta
  double growth_p = 2.0;     // p
  double lyapunov_a = 1.0;   // a in phi(x) = 2a + 2|x|^2

  /// Set when mu and sigma do not depend on x.
  std::optional<ConstantCoefficients> constant_coefficients;
};

struct ProblemId {
  std::string name;
  std::map<std::string, double> overrides;
};

/// Built-in problem names.
const std::vector<std::string>& catalogue_names();

/// Builds a catalogue problem. Throws std::invalid_argument on an unknown
/// name, an unknown override key, or an override outside its documented range.
///
/// Overrides (all problems): d in [1, 100000] (integer), T in (0, 10].
///   nonlinear-coeff-sine: kappa in [0, 1] (0.5), L in [0, 4] (0.5), h0 in [-10, 10] (0.25)
///   scaled-bs:            drift in [-4, 4] (0.1), vol in [0, 4] (0.5), L in [0, 4] (0.5),
///                         strike in [0, 100] (1)
Problem instantiate(const ProblemId& id);

/// phi(x) = 2a + 2|x|^2 with the problem's Lyapunov constant.
double problem_phi(const Problem& problem, std::span<const double> x);

struct Violation {
  std::string hypothesis;
  std::string witness;
};

struct ValidationReport {
  std::size_t samples = 0;
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

/// Monte Carlo spot check of every hypothesis inequality (Lipschitz bounds on
/// mu and sigma, the phi-derivative and linear-growth conditions, the growth
/// bound on f(t,x,0) and g, the joint Lipschitz condition on g and f, and L as a
/// Lipschitz constant of f in u) on
/// `samples` random tuples with x, y drawn from [-h, h]^d.
ValidationReport validate(const Problem& problem, std::size_t samples, std::uint64_t seed,
                          double box_halfwidth = kValidationBoxHalfWidth);

}  // namespace mlp
