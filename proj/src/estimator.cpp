#include "sgda/estimator.hpp"

#include <cmath>

namespace sgda {

EstimatorState anchor(const ProblemInstance& problem, VecView x, VecView y, std::size_t B,
                      const BatchKey& key) {
  const std::size_t dx = problem.dim_x(), dy = problem.dim_y();
  check_dim(x.size(), dx, "anchor x");
  check_dim(y.size(), dy, "anchor y");
  if (B == 0) throw ConfigError("anchor: B must be positive");
  EstimatorState s;
  s.gx.assign(dx, 0.0);
  s.gy.assign(dy, 0.0);
  s.prev_x.assign(x.begin(), x.end());
  s.prev_y.assign(y.begin(), y.end());
  s.epoch = key.epoch;
  s.tau = 0;
  const Regime r = problem.regime();
  if (const auto* fs = std::get_if<FiniteSum>(&r)) {
    full_grad(problem, x, y, s.gx, s.gy);
    s.batch_samples = fs->n;
    return s;
  }
  const auto& k = kernels::active();
  s.last_batch = problem.oracle->draw(key, B);
  Vector tx(dx), ty(dy);
  for (SampleId id : s.last_batch) {
    problem.oracle->grad(x, y, id, tx, ty);
    k.add(s.gx.data(), tx.data(), dx);
    k.add(s.gy.data(), ty.data(), dy);
  }
  k.divide(s.gx.data(), static_cast<double>(B), dx);
  k.divide(s.gy.data(), static_cast<double>(B), dy);
  s.batch_samples = B;
  return s;
}

EstimatorState recurse(EstimatorState s, const ProblemInstance& problem, VecView x_new,
                       VecView y_new, std::size_t M, const BatchKey& key) {
  const std::size_t dx = problem.dim_x(), dy = problem.dim_y();
  check_dim(x_new.size(), dx, "recurse x");
  check_dim(y_new.size(), dy, "recurse y");
  check_dim(s.gx.size(), dx, "estimator gx");
  check_dim(s.gy.size(), dy, "estimator gy");
  if (M == 0) throw ConfigError("recurse: M must be positive");

  const Regime r = problem.regime();
  const auto* fs = std::get_if<FiniteSum>(&r);
  const bool full_pass = fs && M >= fs->n;
  std::size_t count = M;
  if (full_pass) {
    count = fs->n;
    s.last_batch.clear();
  } else {
    s.last_batch = problem.oracle->draw(key, M);
  }

  const auto& k = kernels::active();
  Vector dgx(dx, 0.0), dgy(dy, 0.0);
  Vector ax(dx), ay(dy), bx(dx), by(dy);
  for (std::size_t i = 0; i < count; ++i) {
    const SampleId id = full_pass ? SampleId{i} : s.last_batch[i];
    problem.oracle->grad(x_new, y_new, id, ax, ay);
    problem.oracle->grad(s.prev_x, s.prev_y, id, bx, by);
    k.add_diff(dgx.data(), ax.data(), bx.data(), dx);
    k.add_diff(dgy.data(), ay.data(), by.data(), dy);
  }
  k.divide(dgx.data(), static_cast<double>(count), dx);
  k.divide(dgy.data(), static_cast<double>(count), dy);
  k.add(s.gx.data(), dgx.data(), dx);
  k.add(s.gy.data(), dgy.data(), dy);

  s.prev_x.assign(x_new.begin(), x_new.end());
  s.prev_y.assign(y_new.begin(), y_new.end());
  s.tau += 1;
  s.epoch = key.epoch;
  s.batch_samples = count;
  return s;
}

std::vector<EstimatorMseRow> estimator_mse(const ProblemInstance& problem,
                                           const std::vector<std::pair<Vector, Vector>>& trajectory,
                                           std::size_t M, std::size_t B, std::size_t trials,
                                           std::uint64_t seed) {
  if (!is_finite_sum(problem.regime())) throw RegimeError("estimator_mse needs a finite-sum problem");
  if (trajectory.empty()) throw ConfigError("estimator_mse: empty trajectory");
  if (trials < 2) throw ConfigError("estimator_mse: need at least two trials");
  const std::size_t steps = trajectory.size();

  std::vector<Vector> truth_x(steps), truth_y(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    truth_x[t] = full_grad_x(problem, trajectory[t].first, trajectory[t].second);
    truth_y[t] = full_grad_y(problem, trajectory[t].first, trajectory[t].second);
  }

  std::vector<EstimatorMseRow> rows(steps);
  double sum_dx = 0.0, sum_dy = 0.0;
  const double Lx2 = problem.meta.L_x * problem.meta.L_x;
  const double Ly2 = problem.meta.L_y * problem.meta.L_y;
  const double m = static_cast<double>(M);
  for (std::size_t t = 0; t < steps; ++t) {
    if (t > 0) {
      sum_dx += sq_distance(trajectory[t].first, trajectory[t - 1].first);
      sum_dy += sq_distance(trajectory[t].second, trajectory[t - 1].second);
    }
    rows[t].bound_y = Ly2 / m * (sum_dx + sum_dy);
    rows[t].bound_x = 2.0 * Lx2 / m * sum_dx + 2.0 * Ly2 / m * sum_dy;
  }

  // The finite-sum anchor is deterministic, so compute it once.
  const EstimatorState base =
      anchor(problem, trajectory[0].first, trajectory[0].second, B, BatchKey{seed, 0, 0});
  std::vector<double> s1x(steps, 0.0), s2x(steps, 0.0), s1y(steps, 0.0), s2y(steps, 0.0);
  for (std::size_t trial = 0; trial < trials; ++trial) {
    EstimatorState s = base;
    for (std::size_t t = 0; t < steps; ++t) {
      if (t > 0)
        s = recurse(std::move(s), problem, trajectory[t].first, trajectory[t].second, M,
                    BatchKey{seed, trial, t});
      const double ex = sq_distance(s.gx, truth_x[t]);
      const double ey = sq_distance(s.gy, truth_y[t]);
      s1x[t] += ex;
      s2x[t] += ex * ex;
      s1y[t] += ey;
      s2y[t] += ey * ey;
    }
  }
  const double n = static_cast<double>(trials);
  for (std::size_t t = 0; t < steps; ++t) {
    auto stats = [&](double s1, double s2, double& mean, double& se) {
      mean = s1 / n;
      const double var = std::max(0.0, (s2 - n * mean * mean) / (n - 1.0));
      se = std::sqrt(var / n);
    };
    stats(s1x[t], s2x[t], rows[t].mse_x, rows[t].se_x);
    stats(s1y[t], s2y[t], rows[t].mse_y, rows[t].se_y);
  }
  return rows;
}

}  // namespace sgda
