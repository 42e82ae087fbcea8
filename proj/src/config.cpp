#include "mlp/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "mlp/util.hpp"

namespace mlp::harness {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep)) out.push_back(trim(item));
  return out;
}

struct Entry {
  std::string value;
  int line = 0;
};

using Section = std::map<std::string, Entry>;

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"problem", {}},  // name + free-form overrides, checked by instantiate()
      {"query", {"t0", "x0"}},
      {"mlp", {"depths", "euler_steps", "replications", "seed", "threads"}},
      {"reference",
       {"method", "picard_depth", "picard_nodes", "baseline_n", "baseline_M", "baseline_N",
        "baseline_replications", "baseline_seed", "cache_dir"}},
      {"cost", {"weights", "ceiling"}},
      {"output", {"dir"}},
  };
  return keys;
}

class Reader {
 public:
  Reader(std::map<std::string, Section>& sections, std::vector<std::string>& errors)
      : sections_(sections), errors_(errors) {}

  const Entry* find(const std::string& section, const std::string& key) const {
    auto s = sections_.find(section);
    if (s == sections_.end()) return nullptr;
    auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
  }

  void fail(const std::string& section, const std::string& key, const Entry& e,
            const std::string& what) {
    errors_.push_back("line " + std::to_string(e.line) + ": [" + section + "] " + key + ": " +
                      what + " (got '" + e.value + "')");
  }

  std::optional<double> real(const std::string& section, const std::string& key) {
    const Entry* e = find(section, key);
    if (!e) return std::nullopt;
    auto v = to_double(e->value);
    if (!v) fail(section, key, *e, "expected a real number");
    return v;
  }

  std::optional<std::uint64_t> uint(const std::string& section, const std::string& key) {
    const Entry* e = find(section, key);
    if (!e) return std::nullopt;
    auto v = to_uint(e->value);
    if (!v) fail(section, key, *e, "expected a nonnegative integer");
    return v;
  }

  std::optional<std::vector<double>> reals(const std::string& section, const std::string& key) {
    const Entry* e = find(section, key);
    if (!e) return std::nullopt;
    std::vector<double> out;
    for (const auto& item : split(e->value, ',')) {
      auto v = to_double(item);
      if (!v) {
        fail(section, key, *e, "expected a comma-separated list of reals");
        return std::nullopt;
      }
      out.push_back(*v);
    }
    if (out.empty()) fail(section, key, *e, "empty list");
    return out;
  }

  static std::optional<double> to_double(const std::string& s) {
    if (s.empty()) return std::nullopt;
    std::istringstream is(s);
    is.imbue(std::locale::classic());
    double v = 0.0;
    is >> v;
    if (is.fail() || !is.eof() || !std::isfinite(v)) return std::nullopt;
    return v;
  }

  static std::optional<std::uint64_t> to_uint(const std::string& s) {
    std::uint64_t v = 0;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (s.empty() || ec != std::errc{} || ptr != end) return std::nullopt;
    return v;
  }

 private:
  std::map<std::string, Section>& sections_;
  std::vector<std::string>& errors_;
};

std::optional<ReferenceMethod> method_from(const std::string& s) {
  if (s == "auto") return ReferenceMethod::automatic;
  if (s == "closed_form") return ReferenceMethod::closed_form;
  if (s == "picard_quadrature") return ReferenceMethod::picard_quadrature;
  if (s == "mc_baseline") return ReferenceMethod::mc_baseline;
  return std::nullopt;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::runtime_error([&] {
        std::string msg = "invalid configuration:";
        for (const auto& e : errors) msg += "\n  " + e;
        return msg;
      }()),
      errors_(std::move(errors)) {}

std::uint64_t ExperimentConfig::euler_steps_for(const DepthSpec& depth) const {
  MlpParams p{depth.n, depth.M, euler_override, 0};
  return p.resolved_steps();
}

ReferenceMethod effective_method(ReferenceMethod requested, const Problem& problem) {
  if (requested != ReferenceMethod::automatic) return requested;
  if (problem.name == "heat-quadratic" || problem.name == "linear-reaction") {
    return ReferenceMethod::closed_form;
  }
  if (problem.d == 1 && problem.m == 1 && problem.constant_coefficients) {
    return ReferenceMethod::picard_quadrature;
  }
  return ReferenceMethod::mc_baseline;
}

ExperimentConfig parse_config(std::string_view text) {
  std::vector<std::string> errors;
  std::map<std::string, Section> sections;

  std::istringstream in{std::string(text)};
  std::string raw;
  std::string current;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find_first_of("#;");
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        errors.push_back("line " + std::to_string(line_no) + ": malformed section header");
        continue;
      }
      current = trim(line.substr(1, line.size() - 2));
      if (!known_keys().count(current)) {
        errors.push_back("line " + std::to_string(line_no) + ": unknown section [" + current +
                         "]");
      }
      sections[current];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      errors.push_back("line " + std::to_string(line_no) + ": expected 'key = value'");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (current.empty()) {
      errors.push_back("line " + std::to_string(line_no) + ": key '" + key +
                       "' outside any section");
      continue;
    }
    if (key.empty()) {
      errors.push_back("line " + std::to_string(line_no) + ": empty key");
      continue;
    }
    auto& section = sections[current];
    if (auto it = section.find(key); it != section.end()) {
      errors.push_back("duplicate key '" + key + "' in [" + current + "] at lines " +
                       std::to_string(it->second.line) + " and " + std::to_string(line_no));
      continue;
    }
    auto known = known_keys().find(current);
    if (known != known_keys().end() && current != "problem" && !known->second.count(key)) {
      errors.push_back("line " + std::to_string(line_no) + ": unknown key '" + key + "' in [" +
                       current + "]");
      continue;
    }
    section[key] = Entry{value, line_no};
  }

  Reader rd(sections, errors);
  ExperimentConfig cfg;

  if (const Entry* name = rd.find("problem", "name")) {
    cfg.problem.name = name->value;
  } else {
    errors.push_back("[problem] name is required");
  }
  if (auto it = sections.find("problem"); it != sections.end()) {
    for (const auto& [key, entry] : it->second) {
      if (key == "name") continue;
      if (auto v = Reader::to_double(entry.value)) {
        cfg.problem.overrides[key] = *v;
      } else {
        rd.fail("problem", key, entry, "expected a real number");
      }
    }
  }

  if (auto v = rd.real("query", "t0")) cfg.t0 = *v;
  if (auto v = rd.reals("query", "x0")) cfg.x0 = *v;

  if (const Entry* e = rd.find("mlp", "depths")) {
    for (const auto& item : split(e->value, ',')) {
      const auto colon = item.find(':');
      auto n = Reader::to_uint(colon == std::string::npos ? item : trim(item.substr(0, colon)));
      auto M = colon == std::string::npos ? n : Reader::to_uint(trim(item.substr(colon + 1)));
      if (!n || !M || *n > 64 || *M > 64) {
        rd.fail("mlp", "depths", *e, "expected entries 'n' or 'n:M' with 0 <= n, M <= 64");
        cfg.depths.clear();
        break;
      }
      cfg.depths.push_back(DepthSpec{static_cast<int>(*n), *M});
    }
  } else {
    errors.push_back("[mlp] depths is required");
  }
  if (auto v = rd.uint("mlp", "euler_steps")) cfg.euler_override = *v;
  if (auto v = rd.uint("mlp", "replications")) cfg.replications = *v;
  if (auto v = rd.uint("mlp", "seed")) cfg.seed = *v;
  if (auto v = rd.uint("mlp", "threads")) cfg.threads = static_cast<unsigned>(*v);

  if (const Entry* e = rd.find("reference", "method")) {
    if (auto m = method_from(e->value)) {
      cfg.reference.method = *m;
    } else {
      rd.fail("reference", "method", *e,
              "expected auto, closed_form, picard_quadrature or mc_baseline");
    }
  }
  if (auto v = rd.uint("reference", "picard_depth")) cfg.reference.picard_depth = static_cast<int>(*v);
  if (auto v = rd.uint("reference", "picard_nodes")) cfg.reference.picard_nodes = static_cast<int>(*v);
  if (auto v = rd.uint("reference", "baseline_n")) cfg.reference.budget.n = static_cast<int>(*v);
  if (auto v = rd.uint("reference", "baseline_M")) cfg.reference.budget.M = *v;
  if (auto v = rd.uint("reference", "baseline_N")) cfg.reference.budget.N = *v;
  if (auto v = rd.uint("reference", "baseline_replications")) cfg.reference.budget.replications = *v;
  if (auto v = rd.uint("reference", "baseline_seed")) cfg.reference.baseline_seed = *v;
  if (const Entry* e = rd.find("reference", "cache_dir")) cfg.reference.cache_dir = e->value;

  if (auto w = rd.reals("cost", "weights")) {
    if (w->size() != 4 || std::any_of(w->begin(), w->end(), [](double x) { return x < 0.0; })) {
      rd.fail("cost", "weights", *rd.find("cost", "weights"),
              "expected four nonnegative weights v,m,g,f");
    } else {
      cfg.weights = CostWeights{(*w)[0], (*w)[1], (*w)[2], (*w)[3]};
    }
  }
  if (auto v = rd.real("cost", "ceiling")) cfg.cost_ceiling = *v;
  if (const Entry* e = rd.find("output", "dir")) cfg.output_dir = e->value;

  if (errors.empty()) {
    auto more = check_config(cfg);
    errors.insert(errors.end(), more.begin(), more.end());
  }
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError({"cannot open config file " + path.string()});
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::vector<std::string> check_config(const ExperimentConfig& cfg) {
  std::vector<std::string> errors;
  std::optional<Problem> problem;
  try {
    problem = instantiate(cfg.problem);
  } catch (const std::exception& e) {
    errors.push_back(e.what());
  }
  if (cfg.replications < 2) {
    errors.push_back("replications must be >= 2 (got " + std::to_string(cfg.replications) + ")");
  }
  if (cfg.depths.empty()) {
    errors.push_back("at least one depth is required");
  }
  if (!(cfg.cost_ceiling > 0.0)) {
    errors.push_back("cost ceiling must be positive");
  }
  if (problem) {
    if (!(cfg.t0 >= 0.0 && cfg.t0 <= problem->T)) {
      errors.push_back("t0 = " + format_double(cfg.t0) + " outside [0, T]");
    }
    if (cfg.x0.size() != 1 && cfg.x0.size() != problem->d) {
      errors.push_back("x0 has " + std::to_string(cfg.x0.size()) + " entries, problem has d = " +
                       std::to_string(problem->d));
    }
    std::set<std::pair<int, std::uint64_t>> seen;
    for (const auto& depth : cfg.depths) {
      const std::string label =
          "(" + std::to_string(depth.n) + "," + std::to_string(depth.M) + ")";
      if (depth.M < 1) {
        errors.push_back("depth " + label + ": M must be >= 1");
        continue;
      }
      if (!seen.insert({depth.n, depth.M}).second) {
        errors.push_back("depth " + label + " listed twice");
      }
      double bound = 0.0;
      try {
        bound = cost_recursion_bound(depth.n, depth.M, problem->m, cfg.euler_steps_for(depth),
                                     cfg.weights);
      } catch (const std::exception&) {
        bound = HUGE_VAL;
      }
      if (!(bound <= cfg.cost_ceiling)) {
        errors.push_back("depth " + label + ": cost_recursion_bound = " + format_double(bound) +
                         " exceeds ceiling " + format_double(cfg.cost_ceiling));
      }
    }
    if (effective_method(cfg.reference.method, *problem) == ReferenceMethod::mc_baseline &&
        !cfg.depths.empty()) {
      const auto& b = cfg.reference.budget;
      int max_n = 0;
      std::uint64_t max_M = 0, max_N = 0;
      for (const auto& depth : cfg.depths) {
        max_n = std::max(max_n, depth.n);
        max_M = std::max(max_M, depth.M);
        if (depth.M >= 1) {
          try {
            max_N = std::max(max_N, cfg.euler_steps_for(depth));
          } catch (const std::exception&) {
          }
        }
      }
      if (!(b.n > max_n && b.M > max_M && b.N > max_N)) {
        errors.push_back("baseline budget (" + std::to_string(b.n) + "," + std::to_string(b.M) +
                         "," + std::to_string(b.N) +
                         ") must exceed every experiment's (n, M, N)");
      }
      if (b.replications < 2) errors.push_back("baseline_replications must be >= 2");
      // shared root seeds would correlate the reference with the estimates it scores
      const std::uint64_t lo = cfg.reference.baseline_seed, hi = lo + b.replications;
      if (cfg.seed < hi && lo < cfg.seed + cfg.replications) {
        errors.push_back("baseline seeds [" + std::to_string(lo) + ", " + std::to_string(hi) +
                         ") overlap experiment seeds [" + std::to_string(cfg.seed) + ", " +
                         std::to_string(cfg.seed + cfg.replications) + ")");
      }
    }
  }
  return errors;
}

}  // namespace mlp::harness
