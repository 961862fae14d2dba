#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "sgda/core.hpp"
#include "sgda/estimator.hpp"

namespace sgda {

struct SolverConfig {
  std::size_t K = 1, T = 1, M = 1, B = 1;
  double alpha_x = 0.0, alpha_y = 0.0, beta = 1.0, r = 0.0;
  std::uint64_t seed = 0;
  bool record_trace = true;
  std::size_t trace_stride = 1;
  std::optional<Vector> x0, y0, z0;

  void validate() const;
};

struct IterateState {
  Vector x, y, z;
  EstimatorState est;
  std::size_t k = 0, tau = 0;
  std::uint64_t samples_used = 0;
};

struct TraceRow {
  std::size_t k = 0, tau = 0;
  double dx_norm = 0.0, dy_norm = 0.0, xz_gap = 0.0;
  std::uint64_t samples = 0;
  std::optional<double> res_x, res_y, lyapunov;
};

struct RunTrace {
  std::vector<TraceRow> rows;
  Vector output_x, output_y, output_z;
  std::size_t output_k = 0, output_tau = 0;
  /// 1-based position of the output among the K*T post-update iterates.
  std::uint64_t output_index = 0;
  Vector final_x, final_y, final_z;
  std::uint64_t steps = 0;
  std::uint64_t samples_used = 0;
};

/// Receives every trace row (at the configured stride) before it is stored;
/// may fill the optional residual fields.
class TraceSink {
public:
  virtual ~TraceSink() = default;
  virtual void on_row(TraceRow& row, const IterateState& state) = 0;
};

/// Thrown when an iterate or estimate stops being finite; carries the trace so far.
class SolverNonFinite : public NonFiniteError {
public:
  SolverNonFinite(const std::string& what, RunTrace partial)
      : NonFiniteError(what), partial_(std::make_shared<RunTrace>(std::move(partial))) {}
  const RunTrace& partial() const { return *partial_; }

private:
  std::shared_ptr<RunTrace> partial_;
};

/// Start point (user-supplied or the set defaults, projected if infeasible)
/// with a fresh epoch-0 anchor.
IterateState initial_state(const ProblemInstance& problem, const SolverConfig& config);

/// One inner step: primal descent, dual ascent, proximal-center relaxation,
/// then the estimator update for the new point (recursion inside an epoch,
/// a fresh anchor at rollover).
IterateState step(const ProblemInstance& problem, const SolverConfig& config, IterateState state);

/// K*T steps with a uniformly sampled output pair.
RunTrace run(const ProblemInstance& problem, const SolverConfig& config, TraceSink* sink = nullptr);

}  // namespace sgda
