#include "mlp/oracle.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>

#include "mlp/estimator.hpp"
#include "mlp/util.hpp"

namespace mlp::oracle {

std::string to_string(Method m) {
  switch (m) {
    case Method::closed_form:
      return "closed_form";
    case Method::picard_quadrature:
      return "picard_quadrature";
    case Method::mc_baseline:
      return "mc_baseline";
  }
  return "unknown";
}

Reference closed_form(const Problem& problem, double t, std::span<const double> x) {
  if (!(t >= 0.0 && t <= problem.T)) {
    throw std::domain_error("closed_form: t outside [0, T]");
  }
  double sq = 0.0;
  for (double v : x) sq += v * v;
  const double tau = problem.T - t;
  const double dd = static_cast<double>(problem.d);
  Reference ref;
  ref.method = Method::closed_form;
  ref.provenance = problem.canonical;
  if (problem.name == "heat-quadratic") {
    ref.value = sq + dd * tau;
  } else if (problem.name == "linear-reaction") {
    ref.value = std::exp(tau) * (sq + dd * tau);
  } else {
    throw std::invalid_argument("closed_form: no closed form for problem " + problem.name);
  }
  return ref;
}

GaussHermite gauss_hermite(int n) {
  if (n < 1) {
    throw std::invalid_argument("gauss_hermite: need n >= 1");
  }
  // Golub-Welsch: eigenpairs of the symmetric Jacobi matrix of the Hermite recurrence.
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    J(k, k - 1) = J(k - 1, k) = std::sqrt(k / 2.0);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(J);
  GaussHermite gh;
  gh.nodes.resize(static_cast<std::size_t>(n));
  gh.weights.resize(static_cast<std::size_t>(n));
  const double mass = std::sqrt(std::numbers::pi);
  for (int i = 0; i < n; ++i) {
    gh.nodes[static_cast<std::size_t>(i)] = solver.eigenvalues()(i);
    const double v0 = solver.eigenvectors()(0, i);
    gh.weights[static_cast<std::size_t>(i)] = mass * v0 * v0;
  }
  return gh;
}

namespace {

struct Layers {
  int K;
  int P;
  double t0;
  double T;
  double width;
  std::vector<double> centers;  // per time layer
  std::vector<double> values;   // (K + 1) x P

  double time(int j) const { return j == K ? T : t0 + (T - t0) * j / K; }
  double node(int j, int i) const { return centers[j] - width + 2.0 * width * i / (P - 1); }
  double at(int j, int i) const { return values[static_cast<std::size_t>(j) * P + i]; }
  double& at(int j, int i) { return values[static_cast<std::size_t>(j) * P + i]; }

  // Cubic Lagrange interpolation on layer j (extrapolates with the edge stencil).
  double interpolate(int j, double y) const {
    const double spacing = 2.0 * width / (P - 1);
    const double pos = (y - (centers[j] - width)) / spacing;
    int i0 = static_cast<int>(std::floor(pos)) - 1;
    i0 = std::clamp(i0, 0, P - 4);
    const double s = pos - i0;  // stencil nodes at 0, 1, 2, 3
    const double l0 = -(s - 1.0) * (s - 2.0) * (s - 3.0) / 6.0;
    const double l1 = s * (s - 2.0) * (s - 3.0) / 2.0;
    const double l2 = -s * (s - 1.0) * (s - 3.0) / 2.0;
    const double l3 = s * (s - 1.0) * (s - 2.0) / 6.0;
    const double* v = values.data() + static_cast<std::size_t>(j) * P + i0;
    return l0 * v[0] + l1 * v[1] + l2 * v[2] + l3 * v[3];
  }
};

// Composite Simpson over F[0..m] with spacing h; 3/8 rule closes an odd count.
double integrate(const std::vector<double>& F, int m, double h) {
  if (m <= 0) return 0.0;
  if (m == 1) return 0.5 * h * (F[0] + F[1]);
  const int simpson_cells = (m % 2 == 0) ? m : m - 3;
  double sum = 0.0;
  for (int k = 0; k + 2 <= simpson_cells; k += 2) {
    sum += h / 3.0 * (F[k] + 4.0 * F[k + 1] + F[k + 2]);
  }
  if (simpson_cells != m) {
    const int k = simpson_cells;
    sum += 3.0 * h / 8.0 * (F[k] + 3.0 * F[k + 1] + 3.0 * F[k + 2] + F[k + 3]);
  }
  return sum;
}

void check_quadrature_inputs(const Problem& problem, double t, int depth, int nodes,
                             const QuadratureOptions& opts) {
  if (problem.d != 1 || problem.m != 1) {
    throw std::invalid_argument("picard_quadrature_1d requires d = m = 1");
  }
  if (!problem.constant_coefficients) {
    throw std::invalid_argument("picard_quadrature_1d requires constant coefficients");
  }
  if (depth < 1 || nodes < 8) {
    throw std::invalid_argument("picard_quadrature_1d requires depth >= 1 and nodes >= 8");
  }
  if (opts.time_cells < 2 || opts.time_cells % 2 != 0 || opts.space_points < 5 ||
      opts.space_points % 2 == 0 || !(opts.window_sigmas > 0.0)) {
    throw std::invalid_argument(
        "picard_quadrature_1d: time_cells must be even >= 2, space_points odd >= 5");
  }
  if (!(t >= 0.0 && t <= problem.T)) {
    throw std::domain_error("picard_quadrature_1d: t outside [0, T]");
  }
}

std::vector<double> solve_iterates(const Problem& problem, double t0, double x0, int depth,
                                   const GaussHermite& gh, const QuadratureOptions& opts) {
  const double mu = problem.constant_coefficients->drift[0];
  const double sigma = problem.constant_coefficients->diffusion[0];
  const double T = problem.T;
  std::vector<double> iterates;
  if (T - t0 <= 0.0) {
    const double g = problem.terminal(std::span<const double>(&x0, 1));
    iterates.assign(static_cast<std::size_t>(depth), g);
    return iterates;
  }

  Layers u;
  u.K = opts.time_cells;
  u.P = opts.space_points;
  u.t0 = t0;
  u.T = T;
  u.width = opts.window_sigmas * std::fabs(sigma) * std::sqrt(T - t0);
  if (u.width <= 0.0) u.width = 1.0;
  u.centers.resize(static_cast<std::size_t>(u.K) + 1);
  for (int j = 0; j <= u.K; ++j) u.centers[j] = x0 + mu * (u.time(j) - t0);
  u.values.assign(static_cast<std::size_t>(u.K + 1) * u.P, 0.0);
  Layers next = u;

  const std::size_t Q = gh.nodes.size();
  std::vector<double> xi(Q), wq(Q);
  for (std::size_t q = 0; q < Q; ++q) {
    xi[q] = std::numbers::sqrt2 * gh.nodes[q];
    wq[q] = gh.weights[q] / std::sqrt(std::numbers::pi);
  }
  const double h = (T - t0) / u.K;
  const int mid = (u.P - 1) / 2;
  std::vector<double> F(static_cast<std::size_t>(u.K) + 1);

  auto f_eval = [&](double s, double y, double v) {
    return problem.nonlinearity(s, std::span<const double>(&y, 1), v);
  };
  auto g_eval = [&](double y) { return problem.terminal(std::span<const double>(&y, 1)); };

  for (int iter = 0; iter < depth; ++iter) {
    for (int j = 0; j <= u.K; ++j) {
      const double sj = u.time(j);
      const double tau = T - sj;
      for (int i = 0; i < u.P; ++i) {
        const double y = u.node(j, i);
        double terminal = 0.0;
        if (tau > 0.0) {
          const double shift = y + mu * tau;
          const double scale = sigma * std::sqrt(tau);
          for (std::size_t q = 0; q < Q; ++q) terminal += wq[q] * g_eval(shift + scale * xi[q]);
        } else {
          terminal = g_eval(y);
        }
        F[0] = f_eval(sj, y, u.at(j, i));
        for (int r = j + 1; r <= u.K; ++r) {
          const double sr = u.time(r);
          const double dt = sr - sj;
          const double shift = y + mu * dt;
          const double scale = sigma * std::sqrt(dt);
          double e = 0.0;
          for (std::size_t q = 0; q < Q; ++q) {
            const double X = shift + scale * xi[q];
            e += wq[q] * f_eval(sr, X, u.interpolate(r, X));
          }
          F[static_cast<std::size_t>(r - j)] = e;
        }
        next.at(j, i) = terminal + integrate(F, u.K - j, h);
      }
    }
    std::swap(u.values, next.values);
    iterates.push_back(u.at(0, mid));
  }
  return iterates;
}

}  // namespace

std::vector<double> picard_quadrature_iterates(const Problem& problem, double t, double x,
                                               int depth, int nodes,
                                               const QuadratureOptions& opts) {
  check_quadrature_inputs(problem, t, depth, nodes, opts);
  return solve_iterates(problem, t, x, depth, gauss_hermite(nodes), opts);
}

Reference picard_quadrature_1d(const Problem& problem, double t, double x, int depth, int nodes,
                               const QuadratureOptions& opts) {
  check_quadrature_inputs(problem, t, depth, nodes, opts);
  const GaussHermite gh = gauss_hermite(nodes);
  const auto fine = solve_iterates(problem, t, x, depth, gh, opts);
  QuadratureOptions coarse_opts = opts;
  coarse_opts.time_cells = opts.time_cells / 2;
  // Simpson is fourth order; a single coarse cell falls back to the trapezoid rule.
  const auto coarse = solve_iterates(problem, t, x, depth, gh, coarse_opts);
  const double richardson =
      std::fabs(fine.back() - coarse.back()) / (coarse_opts.time_cells >= 2 ? 15.0 : 3.0);
  const double picard_remainder =
      depth >= 2 ? std::fabs(fine[fine.size() - 1] - fine[fine.size() - 2]) : std::fabs(fine[0]);

  Reference ref;
  ref.value = fine.back();
  ref.ci_halfwidth = richardson + picard_remainder;
  ref.method = Method::picard_quadrature;
  std::ostringstream os;
  os << problem.canonical << " depth=" << depth << " nodes=" << nodes
     << " time_cells=" << opts.time_cells << " space_points=" << opts.space_points;
  ref.provenance = os.str();
  return ref;
}

namespace {

std::string join_doubles(std::span<const double> v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += format_double(v[i]);
  }
  return out;
}

constexpr const char* kCacheMagic = "mlp-baseline-cache 1";

struct CacheHeader {
  std::string problem;
  std::string t;
  std::string x;
  std::string budget;
  std::string seed;

  std::string text() const {
    return std::string(kCacheMagic) + "\nproblem = " + problem +
           "\nproblem_hash = " + digest_hex(problem) + "\nt = " + t + "\nx = " + x +
           "\nbudget = " + budget + "\nseed = " + seed + "\nrng_version = " +
           std::to_string(kRngAlgorithmVersion) + "\n";
  }
};

std::optional<Reference> load_cache(const std::filesystem::path& file, const CacheHeader& header) {
  std::ifstream in(file, std::ios::binary);
  if (!in) return std::nullopt;
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string content = buf.str();
  const auto pos = content.rfind("checksum = ");
  if (pos == std::string::npos) return std::nullopt;
  const std::string body = content.substr(0, pos);
  std::string stored = content.substr(pos + 11);
  while (!stored.empty() && (stored.back() == '\n' || stored.back() == '\r')) stored.pop_back();
  if (stored != digest_hex(body)) return std::nullopt;
  const std::string expected = header.text();
  if (body.compare(0, expected.size(), expected) != 0) return std::nullopt;

  std::map<std::string, std::string> kv;
  std::istringstream lines(body.substr(expected.size()));
  std::string line;
  while (std::getline(lines, line)) {
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) continue;
    kv[line.substr(0, eq)] = line.substr(eq + 3);
  }
  if (!kv.count("value") || !kv.count("ci_halfwidth") || !kv.count("provenance")) {
    return std::nullopt;
  }
  Reference ref;
  ref.method = Method::mc_baseline;
  ref.value = std::strtod(kv["value"].c_str(), nullptr);
  ref.ci_halfwidth = std::strtod(kv["ci_halfwidth"].c_str(), nullptr);
  ref.provenance = kv["provenance"];
  return ref;
}

void write_cache(const std::filesystem::path& file, const CacheHeader& header,
                 const Reference& ref, double se) {
  std::filesystem::create_directories(file.parent_path());
  std::string body = header.text();
  body += "value = " + format_double(ref.value) + "\n";
  body += "ci_halfwidth = " + format_double(ref.ci_halfwidth) + "\n";
  body += "standard_error = " + format_double(se) + "\n";
  body += "provenance = " + ref.provenance + "\n";
  const std::string content = body + "checksum = " + digest_hex(body) + "\n";

  std::random_device rd;
  auto tmp = file;
  tmp += ".tmp" + std::to_string(rd());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write cache file " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("failed writing cache file " + tmp.string());
  }
  std::filesystem::rename(tmp, file);
}

}  // namespace

Baseline mc_baseline(const Problem& problem, double t, std::span<const double> x,
                     const Budget& budget, std::uint64_t seed,
                     const std::filesystem::path& cache_dir, unsigned threads) {
  if (budget.replications < 2) {
    throw std::invalid_argument("mc_baseline: need at least 2 replications");
  }
  MlpParams base{budget.n, budget.M, budget.N, 0};
  base.check();

  CacheHeader header;
  header.problem = problem.canonical;
  header.t = format_double(t);
  header.x = join_doubles(x);
  header.budget = std::to_string(budget.n) + "," + std::to_string(budget.M) + "," +
                  std::to_string(budget.N) + "," + std::to_string(budget.replications);
  header.seed = std::to_string(seed);
  const std::string key_digest = digest_hex(header.text());

  Baseline out;
  out.cache_file = cache_dir / ("baseline-" + key_digest.substr(0, 16) + ".txt");
  if (auto cached = load_cache(out.cache_file, header)) {
    out.reference = *cached;
    out.from_cache = true;
    return out;
  }

  std::vector<double> values(budget.replications);
  parallel_for(budget.replications, threads, [&](std::size_t r) {
    MlpParams params = base;
    params.root_seed = seed + r;
    values[r] = estimate(problem, params, ThetaIndex{0}, t, x).value;
  });
  double sum = 0.0;
  for (double v : values) sum += v;
  const double R = static_cast<double>(values.size());
  const double mean = sum / R;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double se = std::sqrt(ss / (R - 1.0) / R);

  out.reference.value = mean;
  out.reference.ci_halfwidth = 2.58 * se;
  out.reference.method = Method::mc_baseline;
  out.reference.provenance = "config-hash:" + key_digest.substr(0, 16) + " seed:" + header.seed;
  write_cache(out.cache_file, header, out.reference, se);
  return out;
}

}  // namespace mlp::oracle
