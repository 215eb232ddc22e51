#include "qfrac/config.hpp"

#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <set>
#include <sstream>
#include <yaml-cpp/yaml.h>

namespace qfrac {

std::string to_string(TaskKind k) {
  switch (k) {
    case TaskKind::check: return "check";
    case TaskKind::solve: return "solve";
    case TaskKind::resolvent_scan: return "resolvent-scan";
    case TaskKind::fracpow: return "fracpow";
    case TaskKind::oracle_compare: return "oracle-compare";
  }
  return "?";
}

TaskKind parse_task_kind(const std::string& name) {
  for (TaskKind k : {TaskKind::check, TaskKind::solve, TaskKind::resolvent_scan, TaskKind::fracpow,
                     TaskKind::oracle_compare})
    if (to_string(k) == name) return k;
  throw ConfigError(fmt::format("unknown task '{}'", name));
}

namespace {

std::string where(const YAML::Node& n) {
  const int line = n.Mark().line;
  return line >= 0 ? fmt::format("line {}", line + 1) : std::string("config");
}

[[noreturn]] void fail(const YAML::Node& n, const std::string& key, const std::string& msg) {
  throw ConfigError(fmt::format("{}: key '{}': {}", where(n), key, msg));
}

void require_map(const YAML::Node& n, const std::string& key) {
  if (!n.IsMap()) fail(n, key, "expected a mapping");
}

void check_keys(const YAML::Node& n, const std::string& section, const std::set<std::string>& allowed) {
  require_map(n, section);
  for (const auto& kv : n) {
    const std::string k = kv.first.as<std::string>();
    if (!allowed.count(k)) fail(kv.first, section.empty() ? k : section + "." + k, "unknown key");
  }
}

template <typename T>
T get(const YAML::Node& parent, const std::string& key, T fallback, const std::string& path) {
  const YAML::Node n = parent[key];
  if (!n) return fallback;
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    fail(n, path + key, "wrong type");
  }
}

double get_positive(const YAML::Node& parent, const std::string& key, double fallback, const std::string& path) {
  const double v = get<double>(parent, key, fallback, path);
  if (!(v > 0.0) || !std::isfinite(v)) fail(parent[key] ? parent[key] : parent, path + key, "must be positive");
  return v;
}

Vec3 get_vec3(const YAML::Node& parent, const std::string& key, Vec3 fallback, const std::string& path) {
  const YAML::Node n = parent[key];
  if (!n) return fallback;
  if (!n.IsSequence() || n.size() != 3) fail(n, path + key, "expected a list of 3 numbers");
  Vec3 out;
  for (int i = 0; i < 3; ++i) {
    try {
      out[i] = n[i].as<double>();
    } catch (const YAML::Exception&) {
      fail(n, path + key, "expected a list of 3 numbers");
    }
  }
  return out;
}

Quaternion get_quaternion(const YAML::Node& parent, const std::string& key, Quaternion fallback,
                          const std::string& path) {
  const YAML::Node n = parent[key];
  if (!n) return fallback;
  if (!n.IsSequence() || (n.size() != 3 && n.size() != 4)) fail(n, path + key, "expected 3 or 4 numbers");
  Quaternion q;
  const int off = n.size() == 3 ? 1 : 0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    try {
      q[static_cast<int>(i) + off] = n[i].as<double>();
    } catch (const YAML::Exception&) {
      fail(n, path + key, "expected numbers");
    }
  }
  return q;
}

Quaternion get_unit(const YAML::Node& parent, const std::string& key, const std::string& path) {
  const Quaternion j = get_quaternion(parent, key, Quaternion::unit(0), path);
  try {
    return SlicePoint::make(j, 1.0).j;
  } catch (const std::exception& e) {
    fail(parent[key], path + key, e.what());
  }
}

std::vector<double> get_list(const YAML::Node& parent, const std::string& key, std::vector<double> fallback,
                             const std::string& path) {
  const YAML::Node n = parent[key];
  if (!n) return fallback;
  if (n.IsScalar()) return {get<double>(parent, key, 0.0, path)};
  if (!n.IsSequence() || n.size() == 0) fail(n, path + key, "expected a nonempty list of numbers");
  std::vector<double> out;
  for (const auto& e : n) {
    try {
      out.push_back(e.as<double>());
    } catch (const YAML::Exception&) {
      fail(e, path + key, "expected numbers");
    }
  }
  return out;
}

InputKind parse_input(const YAML::Node& parent, const std::string& key, InputKind fallback, const std::string& path) {
  const YAML::Node n = parent[key];
  if (!n) return fallback;
  const std::string s = get<std::string>(parent, key, "", path);
  if (s == "random") return InputKind::random;
  if (s == "bump") return InputKind::bump;
  if (s == "manufactured") return InputKind::manufactured;
  fail(n, path + key, "expected random, bump or manufactured");
}

Coefficient parse_coefficient(const YAML::Node& n, const std::string& path) {
  if (n.IsScalar()) {
    try {
      return Coefficient::constant(n.as<double>());
    } catch (const YAML::Exception&) {
      fail(n, path, "expected a number or a mapping");
    }
  }
  check_keys(n, path, {"family", "K", "A", "lambda", "P", "Q", "width", "v", "k", "phase"});
  const std::string p = path + ".";
  const std::string family = get<std::string>(n, "family", "constant", p);
  const double K = get<double>(n, "K", 1.0, p);
  const double A = get<double>(n, "A", 0.0, p);
  if (family == "constant") return Coefficient::constant(K);
  if (family == "hill")
    return Coefficient::hill(K, A, get<double>(n, "lambda", 1.0, p), get_vec3(n, "P", {0, 0, 0}, p),
                             get_vec3(n, "Q", {0, 0, 0}, p), get_positive(n, "width", 1e300, p));
  if (family == "ridge")
    return Coefficient::ridge(K, A, get<double>(n, "lambda", 1.0, p), get_vec3(n, "P", {0, 0, 0}, p),
                              get_vec3(n, "v", {1, 0, 0}, p));
  if (family == "wave")
    return Coefficient::wave(K, A, get_vec3(n, "k", {1, 0, 0}, p), get<double>(n, "phase", 0.0, p));
  fail(n["family"], p + "family", "expected constant, hill, ridge or wave");
}

void parse_domain(const YAML::Node& n, RunConfig& c) {
  check_keys(n, "domain", {"kind", "origin", "box", "center", "radius", "normal"});
  const std::string kind = get<std::string>(n, "kind", "box", "domain.");
  if (kind == "box") c.domain.kind = DomainKind::box;
  else if (kind == "exterior_ball") c.domain.kind = DomainKind::exterior_ball;
  else if (kind == "half_space") c.domain.kind = DomainKind::half_space;
  else fail(n["kind"], "domain.kind", "expected box, exterior_ball or half_space");
  c.domain.origin = get_vec3(n, "origin", c.domain.origin, "domain.");
  c.domain.lengths = get_vec3(n, "box", c.domain.lengths, "domain.");
  c.domain.center = get_vec3(n, "center", c.domain.center, "domain.");
  c.domain.radius = get<double>(n, "radius", c.domain.radius, "domain.");
  c.domain.normal = get_vec3(n, "normal", c.domain.normal, "domain.");
  try {
    c.domain.validate();
  } catch (const std::exception& e) {
    fail(n, "domain", e.what());
  }
}

void parse_grid(const YAML::Node& n, RunConfig& c) {
  check_keys(n, "grid", {"n", "periodic"});
  const YAML::Node nn = n["n"];
  if (nn) {
    if (nn.IsScalar()) {
      const int v = get<int>(n, "n", 0, "grid.");
      c.n = {v, v, v};
    } else if (nn.IsSequence() && nn.size() == 3) {
      for (int i = 0; i < 3; ++i) {
        try {
          c.n[i] = nn[i].as<int>();
        } catch (const YAML::Exception&) {
          fail(nn, "grid.n", "expected integers");
        }
      }
    } else {
      fail(nn, "grid.n", "expected an integer or a list of 3 integers");
    }
    for (int v : c.n)
      if (v < 3) fail(nn, "grid.n", "need at least 3 nodes per axis");
  }
  c.periodic = get<bool>(n, "periodic", false, "grid.");
}

void parse_coeffs(const YAML::Node& n, RunConfig& c) {
  check_keys(n, "coeffs", {"provenance", "a1", "a2", "a3"});
  const std::string prov = get<std::string>(n, "provenance", "analytic", "coeffs.");
  if (prov == "analytic") c.provenance = Provenance::analytic;
  else if (prov == "finite_difference") c.provenance = Provenance::finite_difference;
  else fail(n["provenance"], "coeffs.provenance", "expected analytic or finite_difference");
  for (int l = 0; l < 3; ++l) {
    const std::string key = fmt::format("a{}", l + 1);
    if (n[key]) c.coeffs[l] = parse_coefficient(n[key], "coeffs." + key);
  }
}

void parse_weight(const YAML::Node& n, RunConfig& c) {
  check_keys(n, "weight", {"family", "lambda", "P", "v"});
  WeightFunction w;
  const std::string family = get<std::string>(n, "family", "hill", "weight.");
  if (family == "hill") w.family = WeightFamily::hill;
  else if (family == "ridge") w.family = WeightFamily::ridge;
  else fail(n["family"], "weight.family", "expected hill or ridge");
  w.lambda = get_positive(n, "lambda", 1.0, "weight.");
  w.P = get_vec3(n, "P", c.domain.center, "weight.");
  w.v = get_vec3(n, "v", c.domain.normal, "weight.");
  try {
    w.require_compatible(c.domain);
  } catch (const std::exception& e) {
    fail(n, "weight", e.what());
  }
  c.weight = w;
}

void parse_operator(const YAML::Node& n, RunConfig& c) {
  check_keys(n, "operator", {"m", "stencil_order"});
  c.m = get<int>(n, "m", 1, "operator.");
  if (c.m < 1 || c.m > 4) fail(n["m"], "operator.m", "expected 1..4");
  c.stencil_order = get<int>(n, "stencil_order", 2, "operator.");
  if (c.stencil_order != 2 && c.stencil_order != 4) fail(n["stencil_order"], "operator.stencil_order", "expected 2 or 4");
}

std::vector<double> parse_t_values(const YAML::Node& parent, const std::vector<double>& fallback) {
  const YAML::Node n = parent["t"];
  if (!n) return fallback;
  std::vector<double> out;
  if (n.IsMap()) {
    check_keys(n, "task.t", {"from", "to", "count"});
    const double a = get_positive(n, "from", 0.1, "task.t.");
    const double b = get_positive(n, "to", 100.0, "task.t.");
    const int count = get<int>(n, "count", 4, "task.t.");
    if (count < 1 || b < a) fail(n, "task.t", "need from <= to and count >= 1");
    for (int i = 0; i < count; ++i)
      out.push_back(count == 1 ? a : a * std::pow(b / a, double(i) / (count - 1)));
  } else {
    out = get_list(parent, "t", fallback, "task.");
  }
  for (double t : out)
    if (!(t > 0.0) || !std::isfinite(t)) fail(n, "task.t", "values must be positive");
  return out;
}

void parse_outputs(const YAML::Node& n, OutputNames& o) {
  check_keys(n, "task.outputs", {"report", "scan", "solution", "fracpow", "diagnostics"});
  o.report = get<std::string>(n, "report", o.report, "task.outputs.");
  o.scan = get<std::string>(n, "scan", o.scan, "task.outputs.");
  o.solution = get<std::string>(n, "solution", o.solution, "task.outputs.");
  o.fracpow = get<std::string>(n, "fracpow", o.fracpow, "task.outputs.");
  o.diagnostics = get<std::string>(n, "diagnostics", o.diagnostics, "task.outputs.");
}

SolveMethod parse_method(const YAML::Node& parent) {
  const std::string s = get<std::string>(parent, "method", "iterative", "task.");
  if (s == "iterative") return SolveMethod::iterative_cg_on_normal_structure;
  if (s == "dense") return SolveMethod::dense_lu_oracle;
  fail(parent["method"], "task.method", "expected iterative or dense");
}

void parse_task(const YAML::Node& n, TaskKind kind, RunConfig& c) {
  require_map(n, "task");
  std::set<std::string> allowed{"kind", "outputs"};
  switch (kind) {
    case TaskKind::check: allowed.insert({"probe_t", "probe_bumps", "poincare_p"}); break;
    case TaskKind::solve: allowed.insert({"s", "rhs", "tol", "max_iter", "method", "dense_cap"}); break;
    case TaskKind::resolvent_scan: allowed.insert({"j", "t", "tol", "max_iter"}); break;
    case TaskKind::fracpow:
      allowed.insert({"alpha", "variant", "j", "t_max", "panels_per_decade", "nodes_per_panel", "inner_panels",
                      "tail_terms", "tail_tol", "solver_tol", "input", "surrogate_lambda", "theta"});
      break;
    case TaskKind::oracle_compare: allowed.insert({"samples", "dense_cap", "tol"}); break;
  }
  check_keys(n, "task", allowed);
  if (n["kind"]) {
    const std::string k = get<std::string>(n, "kind", "", "task.");
    TaskKind parsed;
    try {
      parsed = parse_task_kind(k);
    } catch (const ConfigError& e) {
      fail(n["kind"], "task.kind", e.what());
    }
    if (parsed != kind) fail(n["kind"], "task.kind", fmt::format("config is for '{}', not '{}'", k, to_string(kind)));
    c.task_kind = parsed;
  }
  if (n["outputs"]) parse_outputs(n["outputs"], c.outputs);

  const std::string p = "task.";
  switch (kind) {
    case TaskKind::check: {
      c.check.probe_t = get_list(n, "probe_t", c.check.probe_t, p);
      c.check.probe_bumps = get<std::size_t>(n, "probe_bumps", c.check.probe_bumps, p);
      c.check.poincare_p = get_list(n, "poincare_p", c.check.poincare_p, p);
      for (double v : c.check.poincare_p)
        if (v != 1.0 && v != 2.0) fail(n["poincare_p"], "task.poincare_p", "p must be 1 or 2");
      break;
    }
    case TaskKind::solve: {
      c.solve.s = get_quaternion(n, "s", c.solve.s, p);
      if (c.solve.s.s0 != 0.0) fail(n["s"], "task.s", "Re(s) must be 0");
      if (norm2(c.solve.s) == 0.0) fail(n["s"], "task.s", "s must be nonzero");
      c.solve.rhs = parse_input(n, "rhs", c.solve.rhs, p);
      c.solve.solver.tol = get_positive(n, "tol", c.solve.solver.tol, p);
      c.solve.solver.max_iter = get<int>(n, "max_iter", 0, p);
      c.solve.solver.method = parse_method(n);
      c.solve.solver.dense_cap = get<std::size_t>(n, "dense_cap", c.solve.solver.dense_cap, p);
      break;
    }
    case TaskKind::resolvent_scan: {
      if (n["j"]) c.scan.j = get_unit(n, "j", p);
      c.scan.t_values = parse_t_values(n, c.scan.t_values);
      c.scan.scan.tol = get_positive(n, "tol", c.scan.scan.tol, p);
      c.scan.scan.max_iter = get<int>(n, "max_iter", c.scan.scan.max_iter, p);
      break;
    }
    case TaskKind::fracpow: {
      FracPowOptions& o = c.fracpow.options;
      QuadratureSpec& q = o.quad;
      q.alpha = get<double>(n, "alpha", q.alpha, p);
      const std::string variant = get<std::string>(n, "variant", "right", p);
      if (variant == "right") o.variant = FracVariant::right;
      else if (variant == "left") o.variant = FracVariant::left;
      else fail(n["variant"], "task.variant", "expected left or right");
      if (n["j"]) o.j = get_unit(n, "j", p);
      q.t_max = get<double>(n, "t_max", q.t_max, p);
      q.panels_per_decade = get<int>(n, "panels_per_decade", q.panels_per_decade, p);
      q.nodes_per_panel = get<int>(n, "nodes_per_panel", q.nodes_per_panel, p);
      q.inner_panels = get<int>(n, "inner_panels", q.inner_panels, p);
      q.tail_terms = get<int>(n, "tail_terms", q.tail_terms, p);
      q.tail_tol = get<double>(n, "tail_tol", q.tail_tol, p);
      q.solver_tol = get_positive(n, "solver_tol", q.solver_tol, p);
      o.theta = get_positive(n, "theta", o.theta, p);
      try {
        q.validate();
      } catch (const std::exception& e) {
        fail(n, "task", e.what());
      }
      c.fracpow.input = parse_input(n, "input", c.fracpow.input, p);
      if (n["surrogate_lambda"]) c.fracpow.surrogate_lambda = get_positive(n, "surrogate_lambda", 1.0, p);
      break;
    }
    case TaskKind::oracle_compare: {
      c.oracle.samples = get<std::size_t>(n, "samples", c.oracle.samples, p);
      c.oracle.dense_cap = get<std::size_t>(n, "dense_cap", c.oracle.dense_cap, p);
      c.oracle.tol = get_positive(n, "tol", c.oracle.tol, p);
      break;
    }
  }
}

}  // namespace

RunConfig parse_config(const std::string& text, TaskKind kind) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(fmt::format("line {}: {}", e.mark.line + 1, e.msg));
  }
  RunConfig c;
  if (!root || root.IsNull()) return c;
  check_keys(root, "", {"domain", "grid", "coeffs", "weight", "operator", "task", "seed", "threads"});
  if (root["domain"]) parse_domain(root["domain"], c);
  if (root["grid"]) parse_grid(root["grid"], c);
  if (root["coeffs"]) parse_coeffs(root["coeffs"], c);
  if (root["weight"]) parse_weight(root["weight"], c);
  if (root["operator"]) parse_operator(root["operator"], c);
  if (root["task"]) parse_task(root["task"], kind, c);
  c.seed = get<std::uint64_t>(root, "seed", c.seed, "");
  c.threads = get<int>(root, "threads", c.threads, "");
  if (c.threads < 0) fail(root["threads"], "threads", "must be nonnegative");
  if (c.periodic && c.domain.kind != DomainKind::box)
    throw ConfigError("grid.periodic requires a box domain");
  if (!c.domain.bounded() && !c.weight)
    throw ConfigError("unbounded domains need a weight section");
  return c;
}

RunConfig load_config(const std::string& path, TaskKind kind) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read config '{}'", path));
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str(), kind);
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", path, e.what()));
  }
}

}  // namespace qfrac
