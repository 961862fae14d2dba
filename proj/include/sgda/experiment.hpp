#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sgda/io.hpp"
#include "sgda/tuner.hpp"

namespace sgda {

struct TunerSection {
  double epsilon = 0.0;
  double delta_phi = 1.0;
  std::optional<double> theta, mu;
  double asymptotic_constant = 1.0;
  double sample_cap = 1e9;
  TunerOverrides overrides;
};

/// Values replacing the tuned schedule without re-validation.
struct SolverSection {
  std::optional<std::size_t> K, T, M, B;
  std::optional<double> alpha_x, alpha_y, beta, r;
  std::size_t trace_stride = 1;
  std::size_t residual_stride = 1;  // in trace rows; 0 disables residual columns
  bool lyapunov = false;
  std::optional<Vector> x0, y0;
};

struct OutputSection {
  std::string directory = "out";
  bool csv = true;
  bool json = true;
};

struct ExperimentConfig {
  std::string problem;
  Json params = Json::object();
  TunerSection tuner;
  SolverSection solver;
  OutputSection output;
  std::vector<std::uint64_t> seeds{0};
  std::string base_dir;  // directory of the config file, for relative dataset paths
};

/// Schema validation; unknown keys and out-of-range values throw ConfigError.
ExperimentConfig parse_config(const Json& j, std::string base_dir = ".");
ExperimentConfig load_config(const std::string& path);

struct CliOverrides {
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trace_stride;
};

/// Exit codes: 0 ok, 2 config error, 3 non-finite iterate, 4 infeasible
/// schedule or sample overflow, 1 anything else.
int run_experiment(const std::string& config_path, const CliOverrides& cli, std::ostream& err);
int run_experiment(const ExperimentConfig& config, std::ostream& err);

}  // namespace sgda
