#include "mlp/problems.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <stdexcept>

#include "mlp/bounds.hpp"

namespace mlp {
namespace {

constexpr double kCoeffLip = 4.0;

struct Range {
  double lo;
  double hi;
  double fallback;
  bool lo_open = false;
  bool integer = false;
};

using Schema = std::map<std::string, Range>;

Schema common_schema() {
  return {{"d", {1.0, 100000.0, 1.0, false, true}}, {"T", {0.0, 10.0, 1.0, true, false}}};
}

Schema schema_for(const std::string& name) {
  Schema s = common_schema();
  if (name == "nonlinear-coeff-sine") {
    s["kappa"] = {0.0, 1.0, 0.5};
    s["L"] = {0.0, 4.0, 0.5};
    s["h0"] = {-10.0, 10.0, 0.25};
  } else if (name == "scaled-bs") {
    s["drift"] = {-4.0, 4.0, 0.1};
    s["vol"] = {0.0, 4.0, 0.5};
    s["L"] = {0.0, 4.0, 0.5};
    s["strike"] = {0.0, 100.0, 1.0};
  }
  return s;
}

std::map<std::string, double> resolve(const ProblemId& id) {
  const Schema schema = schema_for(id.name);
  std::map<std::string, double> values;
  for (const auto& [key, range] : schema) values[key] = range.fallback;
  std::vector<std::string> errors;
  for (const auto& [key, value] : id.overrides) {
    auto it = schema.find(key);
    if (it == schema.end()) {
      errors.push_back("unknown parameter '" + key + "' for problem " + id.name);
      continue;
    }
    const Range& r = it->second;
    const bool below = r.lo_open ? !(value > r.lo) : !(value >= r.lo);
    if (below || !(value <= r.hi) || (r.integer && value != std::floor(value))) {
      std::ostringstream os;
      os << "parameter " << key << " = " << value << " outside " << (r.lo_open ? "(" : "[")
         << r.lo << ", " << r.hi << "]" << (r.integer ? " (integer)" : "");
      errors.push_back(os.str());
      continue;
    }
    values[key] = value;
  }
  if (!errors.empty()) {
    std::string msg = "invalid problem overrides:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw std::invalid_argument(msg);
  }
  return values;
}

std::string canonical_name(const std::string& name, const std::map<std::string, double>& values) {
  std::string out = name + "{";
  bool first = true;
  for (const auto& [key, value] : values) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    if (!first) out += ",";
    out += key + "=" + buf;
    first = false;
  }
  return out + "}";
}

double squared_norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

// Smallest b >= 1 with |x|^2 <= b (2d + 2|x|^2)^{1/2} on [-h, h]^d and
// |g(x) - g(y)| <= b (phi(x) + phi(y))^{1/2} |x - y| T^{-1/2} globally.
double quadratic_terminal_growth(std::size_t d, double T, double h) {
  const double dd = static_cast<double>(d);
  const double r2 = h * h * dd;
  return std::max({1.0, std::sqrt(T), r2 / std::sqrt(2.0 * dd + 2.0 * r2)});
}

void identity_diffusion(std::size_t d, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < d; ++i) out[i * d + i] = 1.0;
}

ConstantCoefficients zero_drift_identity(std::size_t d) {
  ConstantCoefficients cc;
  cc.drift.assign(d, 0.0);
  cc.diffusion.assign(d * d, 0.0);
  identity_diffusion(d, cc.diffusion);
  return cc;
}

Problem base_problem(const std::string& name, const std::map<std::string, double>& values) {
  Problem p;
  p.name = name;
  p.canonical = canonical_name(name, values);
  p.d = static_cast<std::size_t>(values.at("d"));
  p.m = p.d;
  p.T = values.at("T");
  p.coeff_lip = kCoeffLip;
  p.growth_beta = 1.0;
  p.growth_p = 2.0;
  p.lyapunov_a = static_cast<double>(p.d);
  return p;
}

Problem make_heat_like(const std::string& name, const std::map<std::string, double>& values,
                       bool linear_reaction) {
  Problem p = base_problem(name, values);
  const std::size_t d = p.d;
  p.drift = [](std::span<const double>, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
  };
  p.diffusion = [d](std::span<const double>, std::span<double> out) { identity_diffusion(d, out); };
  p.terminal = [](std::span<const double> x) { return squared_norm(x); };
  if (linear_reaction) {
    p.nonlinearity = [](double, std::span<const double>, double v) { return v; };
    p.lip_f = 1.0;
  } else {
    p.nonlinearity = [](double, std::span<const double>, double) { return 0.0; };
    p.lip_f = 0.0;
  }
  p.growth_b = quadratic_terminal_growth(d, p.T, kValidationBoxHalfWidth);
  p.constant_coefficients = zero_drift_identity(d);
  return p;
}

Problem make_sine(const std::map<std::string, double>& values) {
  Problem p = base_problem("nonlinear-coeff-sine", values);
  const std::size_t d = p.d;
  const double kappa = values.at("kappa");
  const double L = values.at("L");
  const double h0 = values.at("h0");
  p.drift = [kappa](std::span<const double> x, std::span<double> out) {
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = kappa * std::sin(x[i]);
  };
  p.diffusion = [kappa, d](std::span<const double> x, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t i = 0; i < d; ++i) out[i * d + i] = 1.0 + kappa * std::cos(x[i]);
  };
  p.terminal = [](std::span<const double> x) { return squared_norm(x); };
  p.nonlinearity = [L, h0](double, std::span<const double>, double v) {
    return L * std::sin(v) + h0;
  };
  p.lip_f = L;
  p.growth_b = std::max(quadratic_terminal_growth(d, p.T, kValidationBoxHalfWidth),
                        p.T * std::fabs(h0) / std::sqrt(2.0 * static_cast<double>(d)));
  if (kappa == 0.0) {
    p.constant_coefficients = zero_drift_identity(d);
  }
  return p;
}

Problem make_scaled_bs(const std::map<std::string, double>& values) {
  Problem p = base_problem("scaled-bs", values);
  const std::size_t d = p.d;
  const double drift = values.at("drift");
  const double vol = values.at("vol");
  const double L = values.at("L");
  const double strike = values.at("strike");
  p.drift = [drift](std::span<const double> x, std::span<double> out) {
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = drift * x[i];
  };
  p.diffusion = [vol, d](std::span<const double> x, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t i = 0; i < d; ++i) out[i * d + i] = vol * x[i];
  };
  p.terminal = [strike, d](std::span<const double> x) {
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(d);
    return std::max(mean - strike, 0.0);
  };
  p.nonlinearity = [L](double, std::span<const double>, double v) { return L * std::max(v, 0.0); };
  p.lip_f = L;
  p.growth_b = std::max(1.0, std::sqrt(p.T));
  return p;
}

std::string format_vec(std::span<const double> v) {
  std::ostringstream os;
  os.precision(6);
  os << '[';
  for (std::size_t i = 0; i < v.size() && i < 8; ++i) os << (i ? "," : "") << v[i];
  if (v.size() > 8) os << ",...";
  os << ']';
  return os.str();
}

bool exceeds(double lhs, double rhs) {
  return lhs > rhs + 1e-12 * (1.0 + std::fabs(rhs));
}

}  // namespace

const std::vector<std::string>& catalogue_names() {
  static const std::vector<std::string> names = {"heat-quadratic", "linear-reaction",
                                                 "nonlinear-coeff-sine", "scaled-bs"};
  return names;
}

Problem instantiate(const ProblemId& id) {
  const auto& names = catalogue_names();
  if (std::find(names.begin(), names.end(), id.name) == names.end()) {
    std::string msg = "unknown problem '" + id.name + "'; available:";
    for (const auto& n : names) msg += " " + n;
    throw std::invalid_argument(msg);
  }
  const auto values = resolve(id);
  if (id.name == "heat-quadratic") return make_heat_like(id.name, values, false);
  if (id.name == "linear-reaction") return make_heat_like(id.name, values, true);
  if (id.name == "nonlinear-coeff-sine") return make_sine(values);
  return make_scaled_bs(values);
}

double problem_phi(const Problem& problem, std::span<const double> x) {
  return bounds::lyapunov_phi(x, problem.lyapunov_a);
}

ValidationReport validate(const Problem& pr, std::size_t samples, std::uint64_t seed,
                          double box_halfwidth) {
  if (samples == 0) {
    throw std::invalid_argument("validate: samples must be >= 1");
  }
  ValidationReport report;
  report.samples = samples;

  const double c = pr.coeff_lip;
  const double b = pr.growth_b;
  const double beta = pr.growth_beta;
  const double p = pr.growth_p;
  const double T = pr.T;
  auto add = [&](std::string hyp, std::string witness) {
    report.violations.push_back({std::move(hyp), std::move(witness)});
  };

  if (!(T > 0.0 && pr.d >= 1 && pr.m >= 1 && pr.lip_f >= 0.0 && c >= 1.0 && b >= 1.0 &&
        beta >= 1.0 && p >= 2.0 * beta)) {
    add("constants", "need T > 0, d, m >= 1, L >= 0, c >= 1, b >= 1, beta >= 1, p >= 2 beta");
  }
  if (!(pr.lyapunov_a >= 0.5)) {
    add("constants", "phi >= 1 requires a >= 1/2");
  }
  if (pr.lip_f > c) {
    add("constants", "Lipschitz constant of f exceeds c");
  }

  const std::size_t d = pr.d;
  const std::size_t m = pr.m;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> box(-box_halfwidth, box_halfwidth);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> value(-10.0, 10.0);
  std::normal_distribution<double> normal;

  std::vector<double> x(d), y(d), z(d), zero(d, 0.0);
  std::vector<double> mu_x(d), mu_y(d), mu_0(d);
  std::vector<double> sig_x(d * m), sig_y(d * m), sig_0(d * m);
  pr.drift(zero, mu_0);
  pr.diffusion(zero, sig_0);
  const double mu0_norm = std::sqrt(squared_norm(mu_0));
  const double sig0_norm = std::sqrt(squared_norm(sig_0));

  for (std::size_t s = 0; s < samples; ++s) {
    const double t = T * unit(rng);
    for (std::size_t i = 0; i < d; ++i) {
      x[i] = box(rng);
      y[i] = box(rng);
      z[i] = normal(rng);
    }
    const double v = value(rng);
    const double w = value(rng);
    auto witness = [&] {
      std::ostringstream os;
      os << "t=" << t << " x=" << format_vec(x) << " y=" << format_vec(y) << " v=" << v
         << " w=" << w;
      return os.str();
    };

    pr.drift(x, mu_x);
    pr.drift(y, mu_y);
    pr.diffusion(x, sig_x);
    pr.diffusion(y, sig_y);
    double dx2 = 0.0, dmu2 = 0.0, dsig2 = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      dx2 += (x[i] - y[i]) * (x[i] - y[i]);
      dmu2 += (mu_x[i] - mu_y[i]) * (mu_x[i] - mu_y[i]);
    }
    for (std::size_t k = 0; k < d * m; ++k) dsig2 += (sig_x[k] - sig_y[k]) * (sig_x[k] - sig_y[k]);
    const double dist = std::sqrt(dx2);

    if (exceeds(std::max(dmu2, dsig2), c * c * dx2)) {
      add("coefficient Lipschitz: max{|mu(x)-mu(y)|^2, |sigma(x)-sigma(y)|_F^2} <= c^2 |x-y|^2",
          witness());
    }

    const double phi_x = problem_phi(pr, x);
    const double phi_y = problem_phi(pr, y);
    const double z_norm = std::sqrt(squared_norm(z));
    const double x_norm = std::sqrt(squared_norm(x));
    if (exceeds(std::fabs(bounds::lyapunov_first_derivative(x, z)),
                c * std::pow(phi_x, (p - 1.0) / p) * z_norm)) {
      add("phi first derivative: |phi'(x)(z)| <= c phi(x)^{(p-1)/p} |z|", witness());
    }
    if (exceeds(std::fabs(bounds::lyapunov_second_derivative(z)),
                c * std::pow(phi_x, (p - 2.0) / p) * z_norm * z_norm)) {
      add("phi second derivative: |phi''(x)(z,z)| <= c phi(x)^{(p-2)/p} |z|^2", witness());
    }
    const double phi_root = std::pow(phi_x, 1.0 / p);
    if (exceeds(c * x_norm + mu0_norm, c * phi_root)) {
      add("drift growth: c|x| + |mu(0)| <= c phi(x)^{1/p}", witness());
    }
    if (exceeds(c * x_norm + sig0_norm, c * phi_root)) {
      add("diffusion growth: c|x| + |sigma(0)|_F <= c phi(x)^{1/p}", witness());
    }

    const double gx = pr.terminal(x);
    const double gy = pr.terminal(y);
    const double f0 = T * std::fabs(pr.nonlinearity(t, x, 0.0));
    if (exceeds(std::max(f0, std::fabs(gx)), b * std::pow(phi_x, beta / p))) {
      add("growth: max{|T f(t,x,0)|, |g(x)|} <= b phi(x)^{beta/p}", witness());
    }

    if (exceeds(std::fabs(pr.nonlinearity(t, x, v) - pr.nonlinearity(t, x, w)),
                pr.lip_f * std::fabs(v - w))) {
      add("f Lipschitz in u: |f(t,x,v)-f(t,x,w)| <= L|v-w|", witness());
    }

    const double lip_rhs =
        c * T * std::fabs(v - w) + b * std::pow(phi_x + phi_y, beta / p) * dist / std::sqrt(T);
    const double f_diff = T * std::fabs(pr.nonlinearity(t, x, v) - pr.nonlinearity(t, y, w));
    if (exceeds(std::max(std::fabs(gx - gy), f_diff), lip_rhs)) {
      add("joint Lipschitz: max{|g(x)-g(y)|, T|f(t,x,v)-f(t,y,w)|} <= cT|v-w| + "
          "b (phi(x)+phi(y))^{beta/p} |x-y| / T^{1/2}",
          witness());
    }
  }
  return report;
}

}  // namespace mlp
