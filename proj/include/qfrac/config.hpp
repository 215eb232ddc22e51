#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qfrac/domain.hpp"
#include "qfrac/fracpow.hpp"
#include "qfrac/resolvent.hpp"

namespace qfrac {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class TaskKind { check, solve, resolvent_scan, fracpow, oracle_compare };

std::string to_string(TaskKind k);
/// Accepts the subcommand spelling, e.g. "resolvent-scan".
TaskKind parse_task_kind(const std::string& name);

enum class InputKind { random, bump, manufactured };

struct OutputNames {
  std::string report = "report.json";
  std::string scan = "scan.csv";
  std::string solution = "solution.csv";
  std::string fracpow = "fracpow.csv";
  std::string diagnostics = "diagnostics.txt";
};

struct CheckTask {
  std::vector<double> probe_t{0.5, 2.0};
  std::size_t probe_bumps = 0;  // 0 skips the coercivity probe
  std::vector<double> poincare_p{1.0, 2.0};
};

struct SolveTask {
  Quaternion s = Quaternion::unit(0);
  InputKind rhs = InputKind::manufactured;
  SolverOptions solver;
};

struct ScanTask {
  Quaternion j = Quaternion::unit(0);
  std::vector<double> t_values{0.1, 1.0, 10.0, 100.0};
  NormScanOptions scan;
};

struct FracPowTask {
  FracPowOptions options;
  InputKind input = InputKind::random;
  std::optional<double> surrogate_lambda;  // use lambda * I instead of T
};

struct OracleTask {
  std::size_t samples = 20;
  std::size_t dense_cap = 4096;
  double tol = 1e-12;
};

struct RunConfig {
  DomainSpec domain;
  std::array<int, 3> n{12, 12, 12};
  bool periodic = false;
  Provenance provenance = Provenance::analytic;
  std::array<Coefficient, 3> coeffs{Coefficient::constant(1.0), Coefficient::constant(1.0),
                                    Coefficient::constant(1.0)};
  std::optional<WeightFunction> weight;
  int m = 1;
  int stencil_order = 2;
  std::optional<TaskKind> task_kind;
  CheckTask check;
  SolveTask solve;
  ScanTask scan;
  FracPowTask fracpow;
  OracleTask oracle;
  OutputNames outputs;
  std::uint64_t seed = 0x5eed;
  int threads = 0;  // 0: all hardware threads
};

/// Parses a YAML config for the given subcommand. Task keys that do not belong to `kind` are rejected.
RunConfig parse_config(const std::string& text, TaskKind kind);
RunConfig load_config(const std::string& path, TaskKind kind);

}  // namespace qfrac
