#include <CLI11.hpp>
#include <iostream>

#include "qfrac/cli.hpp"
#include "qfrac/config.hpp"

int main(int argc, char** argv) {
  CLI::App app{"qfrac: quaternionic fractional powers on 3D grids"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::string out_dir = ".";
  int threads = -1;
  std::uint64_t seed = 0;
  bool seed_given = false;

  for (const char* name : {"check", "solve", "resolvent-scan", "fracpow", "oracle-compare"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "YAML config file")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--threads", threads, "worker threads (0: all)")->check(CLI::NonNegativeNumber);
    sub->add_option_function<std::uint64_t>(
        "--seed",
        [&](const std::uint64_t& s) {
          seed = s;
          seed_given = true;
        },
        "seed for random test suites");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : qfrac::exit_config;
  }

  const CLI::App* sub = app.get_subcommands().front();
  const qfrac::TaskKind kind = qfrac::parse_task_kind(sub->get_name());
  qfrac::RunConfig cfg;
  try {
    cfg = qfrac::load_config(config_path, kind);
  } catch (const qfrac::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return qfrac::exit_config;
  }
  if (threads >= 0) cfg.threads = threads;
  if (seed_given) cfg.seed = seed;
  return qfrac::run_task(kind, cfg, out_dir, std::cout, std::cerr);
}
