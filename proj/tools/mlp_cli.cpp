// Command-line front end: run, sweep-epsilon, validate-problem, selftest.
// Exit code 0 only when every asserted invariant holds.

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "mlp/config.hpp"
#include "mlp/harness.hpp"
#include "mlp/problems.hpp"

namespace {

mlp::harness::ExperimentConfig load_with_env(const std::string& path) {
  auto cfg = mlp::harness::load_config(path);
  if (const char* dir = std::getenv("MLP_OUTPUT_DIR"); dir && *dir) cfg.output_dir = dir;
  if (const char* dir = std::getenv("MLP_CACHE_DIR"); dir && *dir) cfg.reference.cache_dir = dir;
  return cfg;
}

int run(const std::string& path, unsigned threads) {
  const auto cfg = load_with_env(path);
  const auto result = mlp::harness::run_experiment(cfg, threads);
  mlp::harness::print_summary(std::cout, result);
  std::cout << "wrote " << (cfg.output_dir / "results.csv").string() << '\n';
  return result.ok() ? 0 : 1;
}

int sweep(const std::string& path, const std::vector<double>& eps, unsigned threads) {
  const auto cfg = load_with_env(path);
  const auto results = mlp::harness::sweep_epsilon(cfg, eps, threads);
  bool ok = true;
  for (const auto& r : results) {
    if (r.n_star) {
      std::cout << "eps " << r.epsilon << ": n* = " << *r.n_star << ", cost " << r.cost_sum
                << ", cost*eps^5 " << r.cost_times_eps5 << ", total_cost_bound "
                << r.total_cost_bound << '\n';
    } else {
      std::cout << "eps " << r.epsilon << ": FAILED, " << r.message << '\n';
      ok = false;
    }
  }
  std::cout << "wrote " << (cfg.output_dir / "epsilon.csv").string() << '\n';
  return ok ? 0 : 1;
}

int validate(const std::string& name, std::size_t d, std::size_t samples, std::uint64_t seed) {
  const auto problem = mlp::instantiate({name, {{"d", static_cast<double>(d)}}});
  const auto report = mlp::validate(problem, samples, seed);
  std::cout << problem.canonical << ": " << report.samples << " samples, "
            << report.violations.size() << " violations\n";
  for (const auto& v : report.violations) {
    std::cout << "  " << v.hypothesis << ": " << v.witness << '\n';
  }
  return report.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multilevel Picard solver for semilinear parabolic PDEs"};
  app.require_subcommand(1);

  std::string config_path;
  unsigned threads = 0;
  auto* run_cmd = app.add_subcommand("run", "Run the depths of a config and write CSV reports");
  run_cmd->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--threads", threads, "Worker threads (0 = all cores)");

  std::vector<double> eps;
  auto* sweep_cmd = app.add_subcommand("sweep-epsilon", "Smallest depth reaching each accuracy");
  sweep_cmd->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  sweep_cmd->add_option("--eps", eps, "Target accuracies in (0, 1]")->required()->delimiter(',');
  sweep_cmd->add_option("--threads", threads, "Worker threads (0 = all cores)");

  std::string name;
  std::size_t d = 1, samples = 10000;
  std::uint64_t seed = 1;
  auto* val_cmd = app.add_subcommand("validate-problem", "Spot-check a problem's hypotheses");
  val_cmd->add_option("name", name, "Catalogue problem")->required()->check(
      CLI::IsMember(mlp::catalogue_names()));
  val_cmd->add_option("--d", d, "Dimension");
  val_cmd->add_option("--samples", samples, "Random tuples");
  val_cmd->add_option("--seed", seed, "Sampling seed");

  auto* self_cmd = app.add_subcommand("selftest", "Run the fast invariant suites");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return run(config_path, threads);
    if (*sweep_cmd) return sweep(config_path, eps, threads);
    if (*val_cmd) return validate(name, d, samples, seed);
    if (*self_cmd) return mlp::harness::selftest(std::cout) ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
