#include "sgda/cli.hpp"

#include <CLI11.hpp>
#include <iostream>

#include "sgda/experiment.hpp"
#include "sgda/log.hpp"
#include "sgda/verify.hpp"

namespace sgda {

namespace {

int verify_command(const std::string& which) {
  std::vector<std::string> names;
  if (which == "all") {
    names = verify::suite_names();
  } else if (verify::has_suite(which)) {
    names = {which};
  } else {
    std::cerr << "unknown suite '" << which << "'; available:";
    for (const auto& n : verify::suite_names()) std::cerr << ' ' << n;
    std::cerr << " all\n";
    return 2;
  }
  bool ok = true;
  for (const auto& n : names) {
    const verify::SuiteResult r = verify::run_suite(n);
    verify::print_suite(std::cout, r);
    ok = ok && r.pass();
  }
  return ok ? 0 : 1;
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"Smoothed stochastic gradient descent-ascent for nonconvex-PL minimax problems"};
  app.require_subcommand(1);
  bool quiet_flag = false;
  app.add_flag("--quiet,-q", quiet_flag, "suppress warnings");

  CliOverrides ov;
  std::string config_path;
  auto* run_cmd = app.add_subcommand("run", "tune and run the solver from a JSON config");
  run_cmd->add_option("config", config_path, "config file")->required();
  run_cmd->add_option("--out", ov.out, "output directory (overrides output.directory)");
  run_cmd->add_option("--seed", ov.seed, "single seed (overrides seeds)");
  run_cmd->add_option("--trace-stride", ov.trace_stride, "record every n-th step");
  run_cmd->fallthrough();

  std::string suite;
  auto* verify_cmd = app.add_subcommand("verify", "run a verification suite");
  verify_cmd->add_option("suite", suite, "suite name or 'all'")->required();
  verify_cmd->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  set_quiet(quiet_flag);

  if (*run_cmd) return run_experiment(config_path, ov, std::cerr);
  return verify_command(suite);
}

}  // namespace sgda
