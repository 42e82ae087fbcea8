#pragma once

// Experiment configuration: a flat, sectioned key-value document.
//
//   # comment
//   [problem]
//   name = heat-quadratic        # catalogue name; every other key is an override
//   d = 1
//   [query]
//   t0 = 0
//   x0 = 0                       # one value (broadcast) or d comma-separated values
//   [mlp]
//   depths = 1,2,3,4             # n (with M = n) or n:M pairs, e.g. 2:3
//   euler_steps = 0              # 0 selects N = M^M
//   replications = 32
//   seed = 0
//   threads = 0                  # 0 = hardware concurrency; never affects results
//   [reference]
//   method = auto                # auto | closed_form | picard_quadrature | mc_baseline
//   picard_depth = 12
//   picard_nodes = 64
//   baseline_n = 5
//   baseline_M = 5
//   baseline_N = 512
//   baseline_replications = 64
//   baseline_seed = 1000000
//   cache_dir = mlp-cache
//   [cost]
//   weights = 1,1,1,1            # v, m, g, f
//   ceiling = 1e10               # largest admissible cost_recursion_bound
//   [output]
//   dir = mlp-output

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mlp/estimator.hpp"
#include "mlp/oracle.hpp"
#include "mlp/problems.hpp"

namespace mlp::harness {

inline constexpr double kDefaultCostCeiling = 1e10;
inline constexpr std::size_t kDefaultReplications = 32;

struct DepthSpec {
  int n = 1;
  std::uint64_t M = 1;
  friend bool operator==(const DepthSpec&, const DepthSpec&) = default;
};

enum class ReferenceMethod { automatic, closed_form, picard_quadrature, mc_baseline };

struct ReferenceSpec {
  ReferenceMethod method = ReferenceMethod::automatic;
  int picard_depth = 12;
  int picard_nodes = 64;
  oracle::Budget budget{};
  std::uint64_t baseline_seed = 1000000;
  std::filesystem::path cache_dir = "mlp-cache";
};

struct ExperimentConfig {
  ProblemId problem;
  double t0 = 0.0;
  std::vector<double> x0;
  std::vector<DepthSpec> depths;
  std::uint64_t euler_override = 0;
  std::size_t replications = kDefaultReplications;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  ReferenceSpec reference;
  CostWeights weights;
  double cost_ceiling = kDefaultCostCeiling;
  std::filesystem::path output_dir = "mlp-output";

  std::uint64_t euler_steps_for(const DepthSpec& depth) const;
};

/// Every problem found while parsing or validating, not just the first.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

/// Resolves `automatic`: closed_form when one exists, else picard_quadrature for
/// one-dimensional constant-coefficient problems, else mc_baseline.
ReferenceMethod effective_method(ReferenceMethod requested, const Problem& problem);

ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Checks the cross-field invariants (R >= 2, x0 dimension, cost ceiling, and for
/// mc_baseline references a budget dominating every depth and disjoint root
/// seeds); returns the list of violations.
std::vector<std::string> check_config(const ExperimentConfig& cfg);

}  // namespace mlp::harness
