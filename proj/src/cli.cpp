#include "qfrac/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fmt/format.h>
#include <fstream>
#include <ostream>
#include <random>
#include <thread>

#include "qfrac/fracpow.hpp"
#include "qfrac/krylov.hpp"
#include "qfrac/operator.hpp"
#include "qfrac/resolvent.hpp"

namespace qfrac {

std::string format_double(double v) {
  if (!std::isfinite(v)) return "null";
  return fmt::format("{:.17g}", v);
}

namespace {

std::string json_string(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    switch (ch) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(ch) < 0x20) out += fmt::format("\\u{:04x}", int(ch));
        else out += ch;
    }
  }
  return out + "\"";
}

}  // namespace

void JsonReport::put(const std::string& key, std::string rendered) {
  for (auto& e : entries_)
    if (e.first == key) {
      e.second = std::move(rendered);
      return;
    }
  entries_.emplace_back(key, std::move(rendered));
}

void JsonReport::set(const std::string& key, double v) { put(key, format_double(v)); }
void JsonReport::set(const std::string& key, long long v) { put(key, std::to_string(v)); }
void JsonReport::set(const std::string& key, bool v) { put(key, v ? "true" : "false"); }
void JsonReport::set(const std::string& key, const std::string& v) { put(key, json_string(v)); }
void JsonReport::set(const std::string& key, const std::vector<std::string>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + json_string(v[i]);
  put(key, s + "]");
}

std::string JsonReport::dump() const {
  std::string out = "{\n";
  for (std::size_t i = 0; i < entries_.size(); ++i)
    out += fmt::format("  {}: {}{}\n", json_string(entries_[i].first), entries_[i].second,
                       i + 1 < entries_.size() ? "," : "");
  return out + "}\n";
}

namespace {

std::vector<std::pair<std::string, double>> constant_rows(const ConstantsReport& r) {
  return {{"m", double(r.m)},
          {"C_T", r.C_T},
          {"M", r.M},
          {"C1", r.C1},
          {"Theta", r.Theta},
          {"C_Omega", r.C_Omega},
          {"C_Omega_discrete", r.C_Omega_discrete},
          {"K_Omega", r.K_Omega},
          {"K_m", r.K_m},
          {"K_rep", r.K_rep},
          {"K_m_Omega", r.K_m_Omega},
          {"K_m_phi_lambda", r.K_m_phi_lambda},
          {"C_phi", r.C_phi},
          {"sup_diag_deriv", r.sup_diag_deriv},
          {"sup_any_deriv", r.sup_any_deriv},
          {"max_a", r.max_a},
          {"max_a2", r.max_a2},
          {"cont_C1", r.cont_C1},
          {"cont_C2", r.cont_C2},
          {"cont_C3", r.cont_C3},
          {"cont_C4", r.cont_C4}};
}

}  // namespace

void add_constants(JsonReport& j, const ConstantsReport& r) {
  for (const auto& [k, v] : constant_rows(r)) j.set(k, v);
  j.set("bounded_case", r.bounded_case);
  j.set("C_T_positive", r.C_T_positive);
  j.set("gap_positive", r.gap_positive);
  if (r.decay_condition) j.set("decay_condition", *r.decay_condition);
  j.set("warnings", r.warnings);
}

std::string constants_table(const ConstantsReport& r) {
  std::string out;
  for (const auto& [k, v] : constant_rows(r)) out += fmt::format("{:<18} {}\n", k, format_double(v));
  out += fmt::format("{:<18} {}\n", "bounded_case", r.bounded_case);
  if (r.decay_condition) out += fmt::format("{:<18} {}\n", "decay_condition", *r.decay_condition);
  return out;
}

namespace {

struct Setup {
  GridPtr grid;
  CoefficientField coeffs;
  ConstantsReport constants;
  HypothesisResult hypothesis;
};

Setup build(const RunConfig& cfg) {
  Setup s;
  s.grid = cfg.periodic ? build_periodic_grid(cfg.domain, cfg.n) : build_grid(cfg.domain, cfg.n);
  s.coeffs = sample_coefficients(s.grid, cfg.coeffs, cfg.m, cfg.provenance);
  s.constants = compute_constants(s.coeffs, *s.grid, cfg.m, cfg.weight);
  s.hypothesis = hypothesis_check(s.constants);
  return s;
}

int thread_count(const RunConfig& cfg) {
  if (cfg.threads > 0) return cfg.threads;
  return std::max(1u, std::thread::hardware_concurrency());
}

void write_file(const std::string& dir, const std::string& name, const std::string& text) {
  const std::filesystem::path p = std::filesystem::path(dir) / name;
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error(fmt::format("cannot write '{}'", p.string()));
  f << text;
}

std::string diagnostics_header(const RunConfig& cfg, const Setup& s, TaskKind kind) {
  std::string d = fmt::format("task {}\ndomain {}\ngrid {}x{}x{} interior {}\nm {} stencil_order {}\nseed {}\n",
                              to_string(kind), to_string(cfg.domain.kind), cfg.n[0], cfg.n[1], cfg.n[2],
                              s.grid->interior_count(), cfg.m, cfg.stencil_order, cfg.seed);
  d += constants_table(s.constants);
  d += "hypothesis " + std::string(s.hypothesis.pass ? "pass: " : "fail: ") + s.hypothesis.explanation + "\n";
  for (const auto& w : s.constants.warnings) d += "warning: " + w + "\n";
  return d;
}

GridFunction make_input(const GridPtr& g, InputKind kind, std::uint64_t seed) {
  if (kind == InputKind::random) return GridFunction::unpack(g, random_vector(8 * g->interior_count(), seed));
  auto suite = random_bump_suite(g, 1, seed);
  return suite.front();
}

JsonReport base_report(TaskKind kind, const RunConfig& cfg, const Setup& s) {
  JsonReport j;
  j.set("task", to_string(kind));
  j.set("domain", to_string(cfg.domain.kind));
  j.set("interior_nodes", static_cast<long long>(s.grid->interior_count()));
  j.set("stencil_order", static_cast<long long>(cfg.stencil_order));
  j.set("seed", std::to_string(cfg.seed));
  add_constants(j, s.constants);
  j.set("hypothesis_pass", s.hypothesis.pass);
  j.set("hypothesis", s.hypothesis.explanation);
  return j;
}

int cmd_check(const RunConfig& cfg, const Setup& s, const std::string& dir, std::ostream& out) {
  JsonReport j = base_report(TaskKind::check, cfg, s);
  std::string diag = diagnostics_header(cfg, s, TaskKind::check);
  out << constants_table(s.constants);
  bool ok = s.hypothesis.pass;
  out << (ok ? "PASS " : "FAIL ") << s.hypothesis.explanation << "\n";

  if (cfg.check.probe_bumps > 0) {
    const auto suite = random_bump_suite(s.grid, cfg.check.probe_bumps, cfg.seed);
    if (cfg.weight) {
      for (double p : cfg.check.poincare_p) {
        bool pass = true;
        double worst = std::numeric_limits<double>::infinity();
        for (const auto& u : suite) {
          const PoincareResult pr = weighted_poincare_check(*s.grid, *cfg.weight, p, u);
          pass = pass && pr.pass;
          worst = std::min(worst, pr.margin);
        }
        const std::string key = fmt::format("poincare_p{}", int(p));
        j.set(key + "_pass", pass);
        j.set(key + "_min_margin", worst);
        const std::string line = fmt::format("{} {} min margin {}\n", key, pass ? "pass" : "fail", format_double(worst));
        out << line;
        diag += line;
        ok = ok && pass;
      }
    }
    if (s.hypothesis.pass) {
      for (double t : cfg.check.probe_t) {
        const CoercivityResult c =
            coercivity_probe(s.coeffs, s.constants, t, Quaternion::unit(0), suite, {cfg.stencil_order});
        const std::string key = fmt::format("coercivity_t{}", format_double(t));
        j.set(key + "_min_excess_l2", c.min_excess_l2);
        j.set(key + "_min_excess_dm", c.min_excess_dm);
        j.set(key + "_pass", c.pass_l2 && c.pass_dm);
        const std::string line = fmt::format("{} {} excess_l2 {} excess_dm {}\n", key,
                                             c.pass_l2 && c.pass_dm ? "pass" : "fail", format_double(c.min_excess_l2),
                                             format_double(c.min_excess_dm));
        out << line;
        diag += line;
        ok = ok && c.pass_l2 && c.pass_dm;
      }
    }
  }
  j.set("pass", ok);
  write_file(dir, cfg.outputs.report, j.dump());
  write_file(dir, cfg.outputs.diagnostics, diag);
  return ok ? exit_ok : exit_hypothesis;
}

int cmd_solve(const RunConfig& cfg, const Setup& s, const std::string& dir, std::ostream& out) {
  const QOperator T = assemble_T(s.grid, s.coeffs, cfg.m, cfg.stencil_order);
  const QOperator Qs = assemble_Qs(T, cfg.solve.s);
  std::optional<GridFunction> known;
  GridFunction F(s.grid);
  if (cfg.solve.rhs == InputKind::manufactured) {
    known = make_input(s.grid, InputKind::bump, cfg.seed);
    F = apply(Qs, *known);
  } else {
    F = make_input(s.grid, cfg.solve.rhs, cfg.seed);
  }
  SolverOptions opt = cfg.solve.solver;
  opt.seed = cfg.seed;
  JsonReport j = base_report(TaskKind::solve, cfg, s);
  std::string diag = diagnostics_header(cfg, s, TaskKind::solve);
  j.set("s", fmt::format("{} {} {} {}", format_double(cfg.solve.s.s0), format_double(cfg.solve.s.s1),
                         format_double(cfg.solve.s.s2), format_double(cfg.solve.s.s3)));
  try {
    auto [u, rep] = solve_Qs(Qs, F, opt);
    j.set("residual", rep.residual);
    j.set("iterations", static_cast<long long>(rep.iterations));
    j.set("method", to_string(rep.method));
    j.set("algorithm", rep.algorithm);
    j.set("tolerance", rep.tolerance);
    out << fmt::format("method {} ({})\niterations {}\nresidual {}\n", to_string(rep.method), rep.algorithm,
                       rep.iterations, format_double(rep.residual));
    diag += fmt::format("solve {} iterations {} residual {}\n", rep.algorithm, rep.iterations,
                        format_double(rep.residual));
    if (known) {
      const double err = (u - *known).l2_norm() / known->l2_norm();
      j.set("manufactured_error", err);
      out << "manufactured error " << format_double(err) << "\n";
    }
    write_file(dir, cfg.outputs.solution, fracpow_csv(u));
    write_file(dir, cfg.outputs.report, j.dump());
    write_file(dir, cfg.outputs.diagnostics, diag);
    return rep.residual <= opt.tol ? exit_ok : exit_solver;
  } catch (const SolveError& e) {
    j.set("error", std::string(e.what()));
    j.set("residual", e.best_residual());
    write_file(dir, cfg.outputs.report, j.dump());
    write_file(dir, cfg.outputs.diagnostics, diag + "error: " + e.what() + "\n");
    throw;
  }
}

int cmd_scan(const RunConfig& cfg, const Setup& s, const std::string& dir, std::ostream& out) {
  JsonReport j = base_report(TaskKind::resolvent_scan, cfg, s);
  std::string diag = diagnostics_header(cfg, s, TaskKind::resolvent_scan);
  if (!s.hypothesis.pass) {
    write_file(dir, cfg.outputs.report, j.dump());
    write_file(dir, cfg.outputs.diagnostics, diag);
    throw std::domain_error("resolvent-scan requires the coercivity hypotheses: " + s.hypothesis.explanation);
  }
  const SResolvent R(assemble_T(s.grid, s.coeffs, cfg.m, cfg.stencil_order));
  NormScanOptions opt = cfg.scan.scan;
  opt.threads = thread_count(cfg);
  opt.seed = cfg.seed;
  const NormScan scan = norm_scan(R, s.constants, cfg.scan.j, cfg.scan.t_values, opt);
  write_file(dir, cfg.outputs.scan, scan.to_csv());
  for (const auto& row : scan.rows) {
    const std::string line =
        fmt::format("t {} q_inv {} (bound {}) sl {} sr {} (bound {}) {}\n", format_double(row.t),
                    format_double(row.q_inv_norm), format_double(row.bound_q), format_double(row.sl_norm),
                    format_double(row.sr_norm), format_double(row.bound_s),
                    !row.error.empty() ? "error: " + row.error : (row.pass_q && row.pass_s ? "pass" : "fail"));
    out << line;
    diag += line;
  }
  j.set("rows", static_cast<long long>(scan.rows.size()));
  j.set("all_pass", scan.all_pass());
  j.set("any_error", scan.any_error());
  write_file(dir, cfg.outputs.report, j.dump());
  write_file(dir, cfg.outputs.diagnostics, diag);
  if (scan.any_error()) return exit_solver;
  return scan.all_pass() ? exit_ok : exit_hypothesis;
}

int cmd_fracpow(const RunConfig& cfg, const Setup& s, const std::string& dir, std::ostream& out) {
  if (cfg.fracpow.input == InputKind::manufactured) throw ConfigError("task.input: fracpow takes random or bump");
  JsonReport j = base_report(TaskKind::fracpow, cfg, s);
  std::string diag = diagnostics_header(cfg, s, TaskKind::fracpow);
  FracPowOptions opt = cfg.fracpow.options;
  opt.threads = thread_count(cfg);
  const GridFunction v = make_input(s.grid, cfg.fracpow.input, cfg.seed);
  FracPowResult res{GridFunction(s.grid), {}};
  if (cfg.fracpow.surrogate_lambda) {
    const double lambda = *cfg.fracpow.surrogate_lambda;
    const SResolvent R(QOperator::scalar_surrogate(s.grid, lambda));
    res = frac_power(R, v, opt);
    const GridFunction ref = v.scaled(std::pow(lambda, opt.quad.alpha));
    const double dev = (res.value - ref).l2_norm() / ref.l2_norm();
    j.set("surrogate_lambda", lambda);
    j.set("surrogate_deviation", dev);
    out << "surrogate deviation " << format_double(dev) << "\n";
  } else {
    if (!s.hypothesis.pass) {
      write_file(dir, cfg.outputs.report, j.dump());
      write_file(dir, cfg.outputs.diagnostics, diag);
      throw std::domain_error("fracpow requires the coercivity hypotheses: " + s.hypothesis.explanation);
    }
    const SResolvent R(assemble_T(s.grid, s.coeffs, cfg.m, cfg.stencil_order));
    res = frac_power(R, s.constants, v, opt);
  }
  const FracPowDiagnostics& d = res.diag;
  j.set("alpha", opt.quad.alpha);
  j.set("variant", opt.variant == FracVariant::left ? "left" : "right");
  j.set("t_max", d.t_max);
  j.set("norm_T_bound", d.norm_T_bound);
  j.set("tail_bound", d.tail_bound);
  j.set("tail_terms", static_cast<long long>(d.tail_terms));
  j.set("nodes", static_cast<long long>(d.nodes));
  j.set("solves", static_cast<long long>(d.solves));
  j.set("max_solver_iterations", static_cast<long long>(d.max_solver_iterations));
  j.set("max_solver_residual", d.max_solver_residual);
  j.set("abs_integral_inner", d.abs_integral_inner);
  j.set("abs_integral_outer", d.abs_integral_outer);
  j.set("input_norm", v.l2_norm());
  j.set("result_norm", res.value.l2_norm());
  const std::string line =
      fmt::format("nodes {} t_max {} tail_terms {} tail_bound {} max_residual {}\nresult norm {}\n", d.nodes,
                  format_double(d.t_max), d.tail_terms, format_double(d.tail_bound),
                  format_double(d.max_solver_residual), format_double(res.value.l2_norm()));
  out << line;
  diag += line;
  write_file(dir, cfg.outputs.fracpow, fracpow_csv(res.value));
  write_file(dir, cfg.outputs.report, j.dump());
  write_file(dir, cfg.outputs.diagnostics, diag);
  return exit_ok;
}

int cmd_oracle(const RunConfig& cfg, const Setup& s, const std::string& dir, std::ostream& out) {
  const std::size_t n = 8 * s.grid->interior_count();
  if (n > cfg.oracle.dense_cap)
    throw ConfigError(fmt::format("oracle-compare refuses 8N = {} > dense cap {}", n, cfg.oracle.dense_cap));
  JsonReport j = base_report(TaskKind::oracle_compare, cfg, s);
  std::string diag = diagnostics_header(cfg, s, TaskKind::oracle_compare);
  const QOperator T = assemble_T(s.grid, s.coeffs, cfg.m, cfg.stencil_order);
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> logt(std::log(0.1), std::log(10.0));
  double worst = 0.0;
  for (std::size_t k = 0; k < cfg.oracle.samples; ++k) {
    Quaternion jj{0.0, normal(rng), normal(rng), normal(rng)};
    jj = (1.0 / abs(jj)) * jj;
    const Quaternion sq = std::exp(logt(rng)) * jj;
    const GridFunction F = GridFunction::unpack(s.grid, random_vector(n, rng()));
    const QOperator Qs = assemble_Qs(T, sq);
    SolverOptions it;
    it.tol = cfg.oracle.tol;
    SolverOptions lu;
    lu.method = SolveMethod::dense_lu_oracle;
    lu.dense_cap = cfg.oracle.dense_cap;
    const auto ui = solve_Qs(Qs, F, it).first;
    const auto ul = solve_Qs(Qs, F, lu).first;
    const double dev = (ui - ul).l2_norm() / ul.l2_norm();
    worst = std::max(worst, dev);
    diag += fmt::format("sample {} |s| {} deviation {}\n", k, format_double(abs(sq)), format_double(dev));
  }
  const bool pass = worst <= 1e-8;
  j.set("samples", static_cast<long long>(cfg.oracle.samples));
  j.set("max_deviation", worst);
  j.set("pass", pass);
  out << "max deviation " << format_double(worst) << (pass ? " pass" : " fail") << "\n";
  write_file(dir, cfg.outputs.report, j.dump());
  write_file(dir, cfg.outputs.diagnostics, diag);
  return pass ? exit_ok : exit_hypothesis;
}

}  // namespace

int run_task(TaskKind kind, const RunConfig& cfg, const std::string& out_dir, std::ostream& out, std::ostream& err) {
  try {
    std::filesystem::create_directories(out_dir);
    const Setup s = build(cfg);
    switch (kind) {
      case TaskKind::check: return cmd_check(cfg, s, out_dir, out);
      case TaskKind::solve: return cmd_solve(cfg, s, out_dir, out);
      case TaskKind::resolvent_scan: return cmd_scan(cfg, s, out_dir, out);
      case TaskKind::fracpow: return cmd_fracpow(cfg, s, out_dir, out);
      case TaskKind::oracle_compare: return cmd_oracle(cfg, s, out_dir, out);
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const SolveError& e) {
    err << "solver failure: " << e.what() << "\n";
    return exit_solver;
  } catch (const std::domain_error& e) {
    err << "hypothesis failure: " << e.what() << "\n";
    return exit_hypothesis;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_solver;
  }
  return exit_config;
}

}  // namespace qfrac
