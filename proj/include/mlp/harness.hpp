#pragma once

// Experiment orchestration: repeated MLP runs against a reference, cost ledgers
// against their bounds, and the epsilon-targeting depth search.
//
// Files written by run_experiment into cfg.output_dir:
//   results.csv  n,M,N,replications,value_mean,value_se,reference_value,
//                reference_ci_halfwidth,reference_method,rmse,rmse_se,reference_ci_flag,
//                error_bound,tallied_cost_mean,tallied_cost_max,cost_recursion_bound,status
//   raw.csv      n,M,N,replication,root_seed,value,tallied_cost,uniforms,gaussians,
//                euler_steps,g_evals,f_evals
//   bounds.csv   n,M,N,error_bound,log_error_bound,cost_recursion_bound,total_cost_bound
//   timing.csv   n,M,N,wall_time_seconds
// sweep_epsilon writes epsilon.csv:
//   epsilon,n_star,status,rmse,rmse_se,rmse_plus_2se,cost_sum,total_cost_bound,
//   cost_times_eps5,message
// Every file except timing.csv is a pure function of the configuration.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mlp/config.hpp"
#include "mlp/csv.hpp"
#include "mlp/estimator.hpp"
#include "mlp/oracle.hpp"
#include "mlp/problems.hpp"

namespace mlp::harness {

struct RawRun {
  std::size_t replication = 0;
  std::uint64_t root_seed = 0;
  double value = 0.0;
  CostTally cost;
  double weighted_cost = 0.0;
};

struct ReportRow {
  int n = 0;
  std::uint64_t M = 1;
  std::uint64_t N = 1;
  std::size_t replications = 0;
  double value_mean = 0.0;
  double value_se = 0.0;
  oracle::Reference reference;
  double rmse = 0.0;
  /// Delta-method standard error of the RMSE: sd(e^2) / (2 rmse sqrt(R)).
  double rmse_se = 0.0;
  /// Reference CI half-width exceeds 10% of the RMSE.
  bool reference_ci_flag = false;
  double error_bound = 0.0;
  double log_error_bound = 0.0;
  double tallied_cost_mean = 0.0;
  double tallied_cost_max = 0.0;
  double cost_recursion_bound = 0.0;
  double wall_time_seconds = 0.0;
  std::vector<RawRun> raw;

  /// Empty when rmse <= error_bound and tallied_cost_max <= cost_recursion_bound.
  std::vector<std::string> failures() const;
  std::string status() const;
};

/// The configured problem and x0 broadcast to dimension d.
struct ResolvedExperiment {
  Problem problem;
  std::vector<double> x0;
};
ResolvedExperiment resolve(const ExperimentConfig& cfg);

/// Evaluates the reference selected by effective_method.
oracle::Reference resolve_reference(const ExperimentConfig& cfg, const Problem& problem,
                                    std::span<const double> x0, unsigned threads);

/// R estimates of U_{n,M}(t0, x0) with root seeds seed + 0 .. seed + R - 1.
ReportRow run_depth(const ExperimentConfig& cfg, const ResolvedExperiment& ex,
                    const oracle::Reference& reference, const DepthSpec& depth,
                    unsigned threads);

struct ExperimentResult {
  std::vector<ReportRow> rows;  // sorted by (n, M)
  oracle::Reference reference;
  bool ok() const;
};

/// Runs every configured depth and writes the four CSV files. `threads`
/// overrides cfg.threads when nonzero; it never changes any result.
ExperimentResult run_experiment(const ExperimentConfig& cfg, unsigned threads = 0);

csv::Table results_table(std::span<const ReportRow> rows);
csv::Table raw_table(std::span<const ReportRow> rows);
csv::Table bounds_table(const ExperimentConfig& cfg, const Problem& problem,
                        std::span<const ReportRow> rows);
csv::Table timing_table(std::span<const ReportRow> rows);

void emit_csv(const csv::Table& table, const std::filesystem::path& path);

struct EpsilonResult {
  double epsilon = 0.0;
  std::optional<int> n_star;
  std::vector<ReportRow> rows;  // depths scanned, n = 1, 2, ...
  /// Sum over k <= n* of the mean tallied cost of U_{k,k}.
  double cost_sum = 0.0;
  double total_cost_bound = 0.0;
  double cost_times_eps5 = 0.0;
  std::string message;
};

/// Smallest n (with M = n) whose RMSE + 2 SE(RMSE) < epsilon, scanning n = 1, 2, ...
/// until cost_recursion_bound(n, n) exceeds the ceiling, which yields a failure
/// result carrying the bound that tripped. Depths in cfg.depths are ignored.
EpsilonResult find_depth_for_epsilon(const ExperimentConfig& cfg, double epsilon,
                                     unsigned threads = 0);

/// find_depth_for_epsilon for every epsilon, sharing the depth runs, and writes
/// epsilon.csv.
std::vector<EpsilonResult> sweep_epsilon(const ExperimentConfig& cfg,
                                         std::span<const double> epsilons,
                                         unsigned threads = 0);

csv::Table epsilon_table(std::span<const EpsilonResult> results);

/// Weights (m + d v, g, v + 2 f) under which total_cost_bound dominates the
/// cost recursion (it counts one Euler step per scalar draw of each path).
struct FoldedWeights {
  double m, g, f;
};
FoldedWeights fold_weights(const CostWeights& w, std::size_t d);

/// Human-readable table of the rows.
void print_summary(std::ostream& os, const ExperimentResult& result);

/// Fast invariant suites; prints one line per check and returns true when all hold.
bool selftest(std::ostream& os);

}  // namespace mlp::harness
