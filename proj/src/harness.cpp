#include "mlp/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "mlp/bounds.hpp"
#include "mlp/util.hpp"

namespace mlp::harness {
namespace {

std::string u64(std::uint64_t v) { return std::to_string(v); }

bounds::BoundParams bound_params(const Problem& p, std::span<const double> x0) {
  bounds::BoundParams bp;
  bp.b = p.growth_b;
  bp.c = p.coeff_lip;
  bp.beta = p.growth_beta;
  bp.p = p.growth_p;
  bp.T = p.T;
  bp.phi_x = problem_phi(p, x0);
  return bp;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_sd(const std::vector<double>& v, double mean) {
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

std::vector<std::string> ReportRow::failures() const {
  std::vector<std::string> out;
  if (!(rmse <= error_bound)) out.push_back("rmse_exceeds_error_bound");
  if (!(tallied_cost_max <= cost_recursion_bound)) out.push_back("cost_exceeds_bound");
  return out;
}

std::string ReportRow::status() const {
  const auto f = failures();
  if (f.empty()) return "ok";
  std::string s = "fail";
  for (const auto& reason : f) s += ":" + reason;
  return s;
}

bool ExperimentResult::ok() const {
  return std::all_of(rows.begin(), rows.end(), [](const ReportRow& r) { return r.failures().empty(); });
}

ResolvedExperiment resolve(const ExperimentConfig& cfg) {
  ResolvedExperiment ex{instantiate(cfg.problem), {}};
  if (cfg.x0.size() == 1) {
    ex.x0.assign(ex.problem.d, cfg.x0.front());
  } else if (cfg.x0.size() == ex.problem.d) {
    ex.x0 = cfg.x0;
  } else {
    throw std::invalid_argument("x0 dimension does not match the problem dimension");
  }
  return ex;
}

oracle::Reference resolve_reference(const ExperimentConfig& cfg, const Problem& problem,
                                    std::span<const double> x0, unsigned threads) {
  const ReferenceMethod method = effective_method(cfg.reference.method, problem);
  switch (method) {
    case ReferenceMethod::closed_form:
      return oracle::closed_form(problem, cfg.t0, x0);
    case ReferenceMethod::picard_quadrature:
      if (x0.size() != 1) throw std::invalid_argument("picard_quadrature needs d = 1");
      return oracle::picard_quadrature_1d(problem, cfg.t0, x0[0], cfg.reference.picard_depth,
                                          cfg.reference.picard_nodes);
    case ReferenceMethod::mc_baseline:
    case ReferenceMethod::automatic:
      break;
  }
  return oracle::mc_baseline(problem, cfg.t0, x0, cfg.reference.budget,
                             cfg.reference.baseline_seed, cfg.reference.cache_dir, threads)
      .reference;
}

ReportRow run_depth(const ExperimentConfig& cfg, const ResolvedExperiment& ex,
                    const oracle::Reference& reference, const DepthSpec& depth,
                    unsigned threads) {
  const Problem& problem = ex.problem;
  ReportRow row;
  row.n = depth.n;
  row.M = depth.M;
  row.N = cfg.euler_steps_for(depth);
  row.replications = cfg.replications;
  row.reference = reference;
  row.cost_recursion_bound = cost_recursion_bound(depth.n, depth.M, problem.m, row.N, cfg.weights);
  if (row.cost_recursion_bound > cfg.cost_ceiling) {
    throw std::invalid_argument("depth (" + std::to_string(depth.n) + "," + u64(depth.M) +
                                "): cost_recursion_bound = " +
                                format_double(row.cost_recursion_bound) + " exceeds ceiling " +
                                format_double(cfg.cost_ceiling));
  }
  const auto bp = bound_params(problem, ex.x0);
  row.error_bound = bounds::error_bound(depth.n, depth.M, bp);
  row.log_error_bound = bounds::log_error_bound(depth.n, depth.M, bp);

  row.raw.resize(cfg.replications);
  const auto start = std::chrono::steady_clock::now();
  parallel_for(cfg.replications, threads, [&](std::size_t r) {
    MlpParams params{depth.n, depth.M, row.N, cfg.seed + r};
    const Estimate e = estimate(problem, params, ThetaIndex{0}, cfg.t0, ex.x0);
    row.raw[r] = RawRun{r, params.root_seed, e.value, e.cost, e.cost.weighted(cfg.weights)};
  });
  row.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  std::vector<double> values, sq_errors, costs;
  for (const auto& run : row.raw) {
    values.push_back(run.value);
    sq_errors.push_back((run.value - reference.value) * (run.value - reference.value));
    costs.push_back(run.weighted_cost);
  }
  const double R = static_cast<double>(cfg.replications);
  row.value_mean = mean_of(values);
  row.value_se = sample_sd(values, row.value_mean) / std::sqrt(R);
  const double mse = mean_of(sq_errors);
  row.rmse = std::sqrt(mse);
  row.rmse_se = row.rmse > 0.0 ? sample_sd(sq_errors, mse) / std::sqrt(R) / (2.0 * row.rmse) : 0.0;
  row.reference_ci_flag = reference.ci_halfwidth > 0.1 * row.rmse;
  row.tallied_cost_mean = mean_of(costs);
  row.tallied_cost_max = *std::max_element(costs.begin(), costs.end());
  return row;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, unsigned threads) {
  if (auto errors = check_config(cfg); !errors.empty()) throw ConfigError(std::move(errors));
  if (threads == 0) threads = cfg.threads;
  const ResolvedExperiment ex = resolve(cfg);

  ExperimentResult result;
  result.reference = resolve_reference(cfg, ex.problem, ex.x0, threads);

  std::vector<DepthSpec> depths = cfg.depths;
  std::sort(depths.begin(), depths.end(), [](const DepthSpec& a, const DepthSpec& b) {
    return std::pair(a.n, a.M) < std::pair(b.n, b.M);
  });
  for (const auto& depth : depths) {
    result.rows.push_back(run_depth(cfg, ex, result.reference, depth, threads));
  }

  emit_csv(results_table(result.rows), cfg.output_dir / "results.csv");
  emit_csv(raw_table(result.rows), cfg.output_dir / "raw.csv");
  emit_csv(bounds_table(cfg, ex.problem, result.rows), cfg.output_dir / "bounds.csv");
  emit_csv(timing_table(result.rows), cfg.output_dir / "timing.csv");
  return result;
}

csv::Table results_table(std::span<const ReportRow> rows) {
  csv::Table t;
  t.header = {"n",          "M",           "N",
              "replications", "value_mean", "value_se",
              "reference_value", "reference_ci_halfwidth", "reference_method",
              "rmse",       "rmse_se",     "reference_ci_flag",
              "error_bound", "tallied_cost_mean", "tallied_cost_max",
              "cost_recursion_bound", "status"};
  for (const auto& r : rows) {
    t.rows.push_back({std::to_string(r.n), u64(r.M), u64(r.N), u64(r.replications),
                      format_double(r.value_mean), format_double(r.value_se),
                      format_double(r.reference.value), format_double(r.reference.ci_halfwidth),
                      oracle::to_string(r.reference.method), format_double(r.rmse),
                      format_double(r.rmse_se), r.reference_ci_flag ? "1" : "0",
                      format_double(r.error_bound), format_double(r.tallied_cost_mean),
                      format_double(r.tallied_cost_max), format_double(r.cost_recursion_bound),
                      r.status()});
  }
  return t;
}

csv::Table raw_table(std::span<const ReportRow> rows) {
  csv::Table t;
  t.header = {"n",        "M",         "N",           "replication", "root_seed", "value",
              "tallied_cost", "uniforms", "gaussians", "euler_steps", "g_evals",   "f_evals"};
  for (const auto& r : rows) {
    for (const auto& run : r.raw) {
      t.rows.push_back({std::to_string(r.n), u64(r.M), u64(r.N), u64(run.replication),
                        u64(run.root_seed), format_double(run.value),
                        format_double(run.weighted_cost), u64(run.cost.uniforms),
                        u64(run.cost.gaussians), u64(run.cost.euler_steps),
                        u64(run.cost.g_evals), u64(run.cost.f_evals)});
    }
  }
  return t;
}

FoldedWeights fold_weights(const CostWeights& w, std::size_t d) {
  return {w.m + static_cast<double>(d) * w.v, w.g, w.v + 2.0 * w.f};
}

csv::Table bounds_table(const ExperimentConfig& cfg, const Problem& problem,
                        std::span<const ReportRow> rows) {
  csv::Table t;
  t.header = {"n", "M", "N", "error_bound", "log_error_bound", "cost_recursion_bound",
              "total_cost_bound"};
  const auto fw = fold_weights(cfg.weights, problem.m);
  for (const auto& r : rows) {
    t.rows.push_back({std::to_string(r.n), u64(r.M), u64(r.N), format_double(r.error_bound),
                      format_double(r.log_error_bound), format_double(r.cost_recursion_bound),
                      r.n >= 1 ? format_double(bounds::total_cost_bound(r.n, fw.m, fw.g, fw.f))
                               : std::string{}});
  }
  return t;
}

csv::Table timing_table(std::span<const ReportRow> rows) {
  csv::Table t;
  t.header = {"n", "M", "N", "wall_time_seconds"};
  for (const auto& r : rows) {
    t.rows.push_back({std::to_string(r.n), u64(r.M), u64(r.N), format_double(r.wall_time_seconds)});
  }
  return t;
}

void emit_csv(const csv::Table& table, const std::filesystem::path& path) {
  csv::write(path, table);
}

namespace {

class DepthScanner {
 public:
  DepthScanner(const ExperimentConfig& cfg, unsigned threads)
      : cfg_(cfg), threads_(threads ? threads : cfg.threads), ex_(resolve(cfg)) {
    reference_ = resolve_reference(cfg_, ex_.problem, ex_.x0, threads_);
  }

  EpsilonResult find(double epsilon) {
    if (!(epsilon > 0.0 && epsilon <= 1.0)) {
      throw std::invalid_argument("epsilon must lie in (0, 1]");
    }
    EpsilonResult out;
    out.epsilon = epsilon;
    for (int n = 1;; ++n) {
      const DepthSpec depth{n, static_cast<std::uint64_t>(n)};
      double bound = HUGE_VAL;
      try {
        bound = cost_recursion_bound(n, depth.M, ex_.problem.m, cfg_.euler_steps_for(depth),
                                     cfg_.weights);
      } catch (const std::exception&) {
      }
      if (!(bound <= cfg_.cost_ceiling)) {
        out.message = "ceiling reached at n = " + std::to_string(n) +
                      ": cost_recursion_bound = " + format_double(bound) + " > " +
                      format_double(cfg_.cost_ceiling);
        return out;
      }
      const ReportRow& row = row_for(depth);
      out.rows.push_back(row);
      out.cost_sum += row.tallied_cost_mean;
      if (row.rmse + 2.0 * row.rmse_se < epsilon) {
        out.n_star = n;
        const auto fw = fold_weights(cfg_.weights, ex_.problem.m);
        out.total_cost_bound = bounds::total_cost_bound(n, fw.m, fw.g, fw.f);
        out.cost_times_eps5 = out.cost_sum * std::pow(epsilon, 5.0);
        return out;
      }
    }
  }

 private:
  const ReportRow& row_for(const DepthSpec& depth) {
    auto it = rows_.find(depth.n);
    if (it == rows_.end()) {
      it = rows_.emplace(depth.n, run_depth(cfg_, ex_, reference_, depth, threads_)).first;
    }
    return it->second;
  }

  const ExperimentConfig& cfg_;
  unsigned threads_;
  ResolvedExperiment ex_;
  oracle::Reference reference_;
  std::map<int, ReportRow> rows_;
};

}  // namespace

EpsilonResult find_depth_for_epsilon(const ExperimentConfig& cfg, double epsilon,
                                     unsigned threads) {
  DepthScanner scanner(cfg, threads);
  return scanner.find(epsilon);
}

std::vector<EpsilonResult> sweep_epsilon(const ExperimentConfig& cfg,
                                         std::span<const double> epsilons, unsigned threads) {
  DepthScanner scanner(cfg, threads);
  std::vector<EpsilonResult> out;
  for (double eps : epsilons) out.push_back(scanner.find(eps));
  emit_csv(epsilon_table(out), cfg.output_dir / "epsilon.csv");
  return out;
}

csv::Table epsilon_table(std::span<const EpsilonResult> results) {
  csv::Table t;
  t.header = {"epsilon",  "n_star",           "status",          "rmse",    "rmse_se",
              "rmse_plus_2se", "cost_sum", "total_cost_bound", "cost_times_eps5", "message"};
  for (const auto& r : results) {
    const ReportRow* last = r.rows.empty() ? nullptr : &r.rows.back();
    auto opt = [&](double v) { return last ? format_double(v) : std::string{}; };
    if (r.n_star) {
      t.rows.push_back({format_double(r.epsilon), std::to_string(*r.n_star), "ok",
                        opt(last->rmse), opt(last->rmse_se), opt(last->rmse + 2.0 * last->rmse_se),
                        format_double(r.cost_sum), format_double(r.total_cost_bound),
                        format_double(r.cost_times_eps5), ""});
    } else {
      t.rows.push_back({format_double(r.epsilon), "", "fail",
                        last ? format_double(last->rmse) : "", last ? format_double(last->rmse_se) : "",
                        last ? format_double(last->rmse + 2.0 * last->rmse_se) : "",
                        format_double(r.cost_sum), "", "", r.message});
    }
  }
  return t;
}

void print_summary(std::ostream& os, const ExperimentResult& result) {
  char line[256];
  std::snprintf(line, sizeof line, "reference %.10g (+/- %.3g, %s)\n", result.reference.value,
                result.reference.ci_halfwidth, oracle::to_string(result.reference.method).c_str());
  os << line;
  std::snprintf(line, sizeof line, "%3s %3s %8s %14s %11s %11s %11s %12s %12s  %s\n", "n", "M",
                "N", "mean", "se", "rmse", "err_bound", "cost_max", "cost_bound", "status");
  os << line;
  for (const auto& r : result.rows) {
    std::snprintf(line, sizeof line, "%3d %3llu %8llu %14.8g %11.4g %11.4g %11.4g %12.5g %12.5g  %s\n",
                  r.n, static_cast<unsigned long long>(r.M), static_cast<unsigned long long>(r.N),
                  r.value_mean, r.value_se, r.rmse, r.error_bound, r.tallied_cost_max,
                  r.cost_recursion_bound, r.status().c_str());
    os << line;
  }
}

bool selftest(std::ostream& os) {
  bool all = true;
  auto check = [&](const std::string& name, auto&& body) {
    bool ok = false;
    std::string detail;
    try {
      ok = body(detail);
    } catch (const std::exception& e) {
      detail = e.what();
    }
    os << (ok ? "PASS " : "FAIL ") << name;
    if (!detail.empty()) os << "  (" << detail << ")";
    os << '\n';
    all = all && ok;
  };

  check("rng streams are pure functions of (seed, node)", [](std::string&) {
    auto a = stream_for(7, ThetaIndex{0, 1, -2});
    auto b = stream_for(7, ThetaIndex{0, 1, -2});
    auto c = stream_for(7, ThetaIndex{0, 1, 2});
    const double ua = a.draw_uniform(), ub = b.draw_uniform(), uc = c.draw_uniform();
    return ua == ub && ua != uc && a.draw_gaussian_vector(5) == b.draw_gaussian_vector(5) &&
           key_for(7, ThetaIndex{0, 1, -2}) == StreamKey::root(7, 0).child(1, -2);
  });

  check("estimates are reproducible and within the cost bound", [](std::string& detail) {
    const Problem p = instantiate({"nonlinear-coeff-sine", {{"d", 2}}});
    const std::vector<double> x{0.3, -0.1};
    for (int n = 0; n <= 3; ++n) {
      for (std::uint64_t M = 1; M <= 3; ++M) {
        MlpParams params{n, M, 0, 11};
        const auto e1 = estimate(p, params, ThetaIndex{0}, 0.0, x);
        const auto e2 = estimate(p, params, ThetaIndex{0}, 0.0, x);
        const double bound = cost_recursion_bound(n, M, p.m, params.resolved_steps(), {});
        if (e1.value != e2.value || !(e1.cost == e2.cost) || e1.cost.weighted({}) > bound) {
          detail = "n=" + std::to_string(n) + " M=" + std::to_string(M);
          return false;
        }
        if (n == 0 && (e1.value != 0.0 || !e1.cost.is_zero())) return false;
      }
    }
    return true;
  });

  check("discrete Gronwall matches its recursion", [](std::string&) {
    const std::vector<double> alpha{1.0, 0.5, 0.25, 2.0, 0.125};
    const double beta = 0.5;
    const auto gamma = bounds::gronwall_discrete(alpha, beta);
    std::vector<double> rec(alpha.size());
    for (std::size_t n = 0; n < alpha.size(); ++n) {
      rec[n] = alpha[n];
      for (std::size_t k = 0; k < n; ++k) rec[n] += beta * rec[k];
    }
    return gamma == rec;
  });

  check("closed form at the origin", [](std::string&) {
    const Problem p = instantiate({"heat-quadratic", {{"d", 3}}});
    const std::vector<double> x(3, 0.0);
    return oracle::closed_form(p, 0.0, x).value == 3.0;
  });

  check("config rejects depths beyond the cost ceiling", [](std::string& detail) {
    try {
      parse_config("[problem]\nname = heat-quadratic\n[query]\nx0 = 0\n[mlp]\ndepths = 9\n");
    } catch (const ConfigError& e) {
      detail = e.errors().front();
      return detail.find("cost_recursion_bound") != std::string::npos;
    }
    return false;
  });

  check("csv round trip", [](std::string&) {
    csv::Table t{{"a", "b"}, {{"1", "x,\"y\""}, {format_double(0.1), ""}}};
    return csv::parse(csv::to_text(t)) == t;
  });

  return all;
}

}  // namespace mlp::harness
