#include "sgda/solver.hpp"

#include <cmath>

#include "sgda/log.hpp"

namespace sgda {

void SolverConfig::validate() const {
  if (K == 0 || T == 0 || M == 0 || B == 0) throw ConfigError("K, T, M, B must be positive");
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(name) + " must be positive");
  };
  positive(alpha_x, "alpha_x");
  positive(alpha_y, "alpha_y");
  positive(r, "r");
  if (!(beta > 0.0 && beta <= 1.0)) throw ConfigError("beta must lie in (0, 1]");
  if (trace_stride == 0) throw ConfigError("trace_stride must be positive");
}

namespace {

Vector start_point(const ConstraintSet& set, const std::optional<Vector>& given, const char* name) {
  if (!given) return set.default_point();
  check_dim(given->size(), set.dim(), name);
  if (!all_finite(*given)) throw ConfigError(std::string(name) + " is not finite");
  if (!set.contains(*given)) {
    log_warning(std::string("initial ") + name + " is infeasible; projecting onto the set");
    return set.project(*given);
  }
  return *given;
}

void check_finite_state(const IterateState& s, RunTrace* trace) {
  if (all_finite(s.x) && all_finite(s.y) && all_finite(s.z) && all_finite(s.est.gx) &&
      all_finite(s.est.gy))
    return;
  const std::string msg = "non-finite iterate at epoch " + std::to_string(s.k) + ", step " +
                          std::to_string(s.tau);
  throw SolverNonFinite(msg, trace ? std::move(*trace) : RunTrace{});
}

// Update lines only; leaves the estimator untouched.
void update(const ProblemInstance& problem, const SolverConfig& c, IterateState& s, Vector& x_new,
            Vector& y_new) {
  const auto& k = kernels::active();
  const std::size_t dx = s.x.size(), dy = s.y.size();
  Vector tx(dx);
  k.primal_step(s.x.data(), s.est.gx.data(), s.z.data(), c.alpha_x, c.r, tx.data(), dx);
  x_new.resize(dx);
  problem.set_x.project_into(tx, x_new);
  Vector ty(s.y);
  k.axpy(c.alpha_y, s.est.gy.data(), ty.data(), dy);
  y_new.resize(dy);
  problem.set_y.project_into(ty, y_new);
  k.relax(s.z.data(), x_new.data(), c.beta, dx);
}

void refresh(const ProblemInstance& problem, const SolverConfig& c, IterateState& s) {
  if (s.tau + 1 < c.T) {
    s.est = recurse(std::move(s.est), problem, s.x, s.y, c.M,
                    BatchKey{c.seed, s.k, s.tau + 1, streams::estimator});
    s.tau += 1;
  } else {
    s.k += 1;
    s.tau = 0;
    s.est = anchor(problem, s.x, s.y, c.B, BatchKey{c.seed, s.k, 0, streams::estimator});
  }
  s.samples_used += s.est.batch_samples;
}

}  // namespace

IterateState initial_state(const ProblemInstance& problem, const SolverConfig& config) {
  config.validate();
  problem.validate();
  IterateState s;
  s.x = start_point(problem.set_x, config.x0, "x0");
  s.y = start_point(problem.set_y, config.y0, "y0");
  if (config.z0) {
    check_dim(config.z0->size(), problem.dim_x(), "z0");
    s.z = *config.z0;
  } else {
    s.z = s.x;
  }
  s.est = anchor(problem, s.x, s.y, config.B, BatchKey{config.seed, 0, 0, streams::estimator});
  s.samples_used = s.est.batch_samples;
  check_finite_state(s, nullptr);
  return s;
}

IterateState step(const ProblemInstance& problem, const SolverConfig& config, IterateState s) {
  if (s.tau >= config.T) throw ConfigError("step: inner counter out of range");
  Vector x_new, y_new;
  update(problem, config, s, x_new, y_new);
  s.x = std::move(x_new);
  s.y = std::move(y_new);
  check_finite_state(s, nullptr);
  refresh(problem, config, s);
  check_finite_state(s, nullptr);
  return s;
}

RunTrace run(const ProblemInstance& problem, const SolverConfig& config, TraceSink* sink) {
  IterateState s = initial_state(problem, config);
  RunTrace trace;
  const std::uint64_t total = static_cast<std::uint64_t>(config.K) * config.T;
  for (std::uint64_t n = 1; n <= total; ++n) {
    const std::size_t k = s.k, tau = s.tau;
    Vector x_new, y_new;
    update(problem, config, s, x_new, y_new);
    TraceRow row;
    row.k = k;
    row.tau = tau;
    row.dx_norm = distance(x_new, s.x);
    row.dy_norm = distance(y_new, s.y);
    row.xz_gap = distance(x_new, s.z);
    s.x = std::move(x_new);
    s.y = std::move(y_new);
    check_finite_state(s, &trace);

    // Single-slot reservoir: keep iterate n with probability 1/n.
    const double u = unit_double(counter_hash(BatchKey{config.seed, 0, 0, streams::output}, n));
    if (n == 1 || u * static_cast<double>(n) < 1.0) {
      trace.output_x = s.x;
      trace.output_y = s.y;
      trace.output_z = s.z;
      trace.output_k = k;
      trace.output_tau = tau;
      trace.output_index = n;
    }

    if (n < total) {
      refresh(problem, config, s);
      check_finite_state(s, &trace);
    }
    row.samples = s.samples_used;
    const bool at_stride = (n - 1) % config.trace_stride == 0 || n == total;
    if (at_stride) {
      if (sink) sink->on_row(row, s);
      if (config.record_trace) trace.rows.push_back(row);
    }
  }
  trace.final_x = s.x;
  trace.final_y = s.y;
  trace.final_z = s.z;
  trace.steps = total;
  trace.samples_used = s.samples_used;
  return trace;
}

}  // namespace sgda
