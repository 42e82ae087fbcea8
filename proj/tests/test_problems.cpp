#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "mlp/problems.hpp"

using namespace mlp;

namespace {

std::vector<double> eval_drift(const Problem& p, const std::vector<double>& x) {
  std::vector<double> out(p.d);
  p.drift(x, out);
  return out;
}

std::vector<double> eval_diffusion(const Problem& p, const std::vector<double>& x) {
  std::vector<double> out(p.d * p.m);
  p.diffusion(x, out);
  return out;
}

std::string message_of(const ProblemId& id) {
  try {
    instantiate(id);
  } catch (const std::invalid_argument& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("catalogue lists the built-in problems") {
  const auto& names = catalogue_names();
  CHECK(names.size() == 4);
  for (const auto& n : names) {
    const Problem p = instantiate({n, {}});
    CHECK(p.name == n);
    CHECK(p.d == 1);
    CHECK(p.T == 1.0);
    CHECK(p.canonical.rfind(n + "{", 0) == 0);
  }
}

TEST_CASE("override validation reports every problem") {
  CHECK(message_of({"no-such-problem", {}}).find("unknown problem") != std::string::npos);
  const std::string msg =
      message_of({"nonlinear-coeff-sine", {{"d", 2.5}, {"kappa", 3.0}, {"nope", 1.0}, {"T", 0.0}}});
  CHECK(msg.find("parameter d") != std::string::npos);
  CHECK(msg.find("parameter kappa") != std::string::npos);
  CHECK(msg.find("unknown parameter 'nope'") != std::string::npos);
  CHECK(msg.find("parameter T") != std::string::npos);
  CHECK(message_of({"heat-quadratic", {{"kappa", 0.1}}}).find("unknown parameter") !=
        std::string::npos);
  CHECK(message_of({"scaled-bs", {{"vol", 4.0}, {"d", 100000}}}).empty());
}

TEST_CASE("canonical names include every resolved parameter") {
  const Problem a = instantiate({"scaled-bs", {{"d", 3}}});
  const Problem b = instantiate({"scaled-bs", {{"d", 3}, {"vol", 0.5}}});
  const Problem c = instantiate({"scaled-bs", {{"d", 3}, {"vol", 0.25}}});
  CHECK(a.canonical == b.canonical);
  CHECK(a.canonical != c.canonical);
  CHECK(a.canonical.find("vol=0.5") != std::string::npos);
}

TEST_CASE("heat-quadratic and linear-reaction") {
  const Problem heat = instantiate({"heat-quadratic", {{"d", 3}, {"T", 2}}});
  const Problem lin = instantiate({"linear-reaction", {{"d", 3}}});
  const std::vector<double> x{1.0, -2.0, 0.5};
  CHECK(heat.terminal(x) == 5.25);
  CHECK(eval_drift(heat, x) == std::vector<double>(3, 0.0));
  CHECK(eval_diffusion(heat, x) == std::vector<double>{1, 0, 0, 0, 1, 0, 0, 0, 1});
  CHECK(heat.nonlinearity(0.3, x, 7.0) == 0.0);
  CHECK(lin.nonlinearity(0.3, x, 7.0) == 7.0);
  CHECK(lin.lip_f == 1.0);
  CHECK(heat.constant_coefficients.has_value());
  CHECK(lin.constant_coefficients.has_value());
  CHECK(problem_phi(heat, x) == doctest::Approx(2 * 3 + 2 * 5.25));
}

TEST_CASE("nonlinear-coeff-sine coefficients") {
  const Problem p = instantiate({"nonlinear-coeff-sine", {{"d", 2}}});
  const std::vector<double> x{0.3, -1.1};
  const auto mu = eval_drift(p, x);
  const auto sigma = eval_diffusion(p, x);
  CHECK(mu[0] == doctest::Approx(0.5 * std::sin(0.3)));
  CHECK(mu[1] == doctest::Approx(0.5 * std::sin(-1.1)));
  CHECK(sigma[0] == doctest::Approx(1 + 0.5 * std::cos(0.3)));
  CHECK(sigma[1] == 0.0);
  CHECK(sigma[2] == 0.0);
  CHECK(sigma[3] == doctest::Approx(1 + 0.5 * std::cos(-1.1)));
  CHECK(p.nonlinearity(0.0, x, 1.0) == doctest::Approx(0.5 * std::sin(1.0) + 0.25));
  CHECK_FALSE(p.constant_coefficients.has_value());
  CHECK(instantiate({"nonlinear-coeff-sine", {{"kappa", 0.0}}}).constant_coefficients.has_value());
}

TEST_CASE("scaled-bs coefficients") {
  const Problem p = instantiate({"scaled-bs", {{"d", 2}, {"strike", 0.5}}});
  const std::vector<double> x{1.0, 2.0};
  CHECK(eval_drift(p, x) == std::vector<double>{0.1, 0.2});
  CHECK(eval_diffusion(p, x) == std::vector<double>{0.5, 0.0, 0.0, 1.0});
  CHECK(p.terminal(x) == 1.0);
  CHECK(p.terminal(std::vector<double>{0.1, 0.1}) == 0.0);
  CHECK(p.nonlinearity(0, x, -3.0) == 0.0);
  CHECK(p.nonlinearity(0, x, 3.0) == 1.5);
}

TEST_CASE("catalogue problems satisfy their hypotheses on the validation box") {
  for (const auto& name : catalogue_names()) {
    for (double d : {1.0, 4.0}) {
      const Problem p = instantiate({name, {{"d", d}}});
      const auto report = validate(p, 4000, 17);
      INFO(p.canonical);
      for (const auto& v : report.violations) INFO(v.hypothesis << " " << v.witness);
      CHECK(report.ok());
      CHECK(report.samples == 4000);
    }
  }
  const Problem extreme =
      instantiate({"scaled-bs", {{"vol", 4.0}, {"drift", -4.0}, {"L", 4.0}, {"T", 10.0}}});
  CHECK(validate(extreme, 4000, 3).ok());
}

TEST_CASE("validation catches understated constants") {
  Problem p = instantiate({"linear-reaction", {}});
  p.lip_f = 0.0;  // f(v) = v is not 0-Lipschitz
  const auto report = validate(p, 2000, 5);
  REQUIRE_FALSE(report.ok());
  bool lip = false;
  for (const auto& v : report.violations) {
    lip = lip || v.hypothesis.find("f Lipschitz in u") != std::string::npos;
    CHECK_FALSE(v.witness.empty());
  }
  CHECK(lip);

  Problem q = instantiate({"heat-quadratic", {}});
  q.lyapunov_a = 0.25;
  CHECK_FALSE(validate(q, 10, 1).ok());

  Problem r = instantiate({"nonlinear-coeff-sine", {}});
  r.drift = [](std::span<const double> x, std::span<double> out) { out[0] = 10.0 * x[0]; };
  CHECK_FALSE(validate(r, 2000, 2).ok());
}
