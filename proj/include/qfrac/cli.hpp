#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "qfrac/config.hpp"
#include "qfrac/forms.hpp"

namespace qfrac {

enum ExitCode : int { exit_ok = 0, exit_config = 1, exit_hypothesis = 2, exit_solver = 3 };

/// Flat JSON object; doubles use 17 significant digits and non-finite values become null.
class JsonReport {
 public:
  void set(const std::string& key, double v);
  void set(const std::string& key, long long v);
  void set(const std::string& key, bool v);
  void set(const std::string& key, const std::string& v);
  void set(const std::string& key, const char* v) { set(key, std::string(v)); }
  void set(const std::string& key, const std::vector<std::string>& v);
  std::string dump() const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
  void put(const std::string& key, std::string rendered);
};

std::string format_double(double v);

void add_constants(JsonReport& j, const ConstantsReport& r);
/// Aligned two-column table of the constants.
std::string constants_table(const ConstantsReport& r);

/// Runs one subcommand; writes files into out_dir and a summary to `out`, errors to `err`.
int run_task(TaskKind kind, const RunConfig& cfg, const std::string& out_dir, std::ostream& out, std::ostream& err);

}  // namespace qfrac
