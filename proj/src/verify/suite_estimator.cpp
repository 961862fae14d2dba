#include <cmath>
#include <cstring>

#include "common.hpp"
#include "sgda/estimator.hpp"
#include "sgda/solver.hpp"

namespace sgda::verify {

namespace {

/// Per-sample gradients summed coordinatewise in index order, then divided.
std::pair<Vector, Vector> reference_full_grad(const ProblemInstance& p, const Vector& x, const Vector& y) {
  const std::size_t n = std::get<FiniteSum>(p.regime()).n;
  Vector sx(p.dim_x(), 0.0), sy(p.dim_y(), 0.0), gx(p.dim_x()), gy(p.dim_y());
  for (std::size_t i = 0; i < n; ++i) {
    p.oracle->grad_x(x, y, SampleId{i}, gx);
    p.oracle->grad_y(x, y, SampleId{i}, gy);
    for (std::size_t j = 0; j < gx.size(); ++j) sx[j] += gx[j];
    for (std::size_t j = 0; j < gy.size(); ++j) sy[j] += gy[j];
  }
  for (double& v : sx) v /= static_cast<double>(n);
  for (double& v : sy) v /= static_cast<double>(n);
  return {sx, sy};
}

bool bit_equal(const Vector& a, const Vector& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

double rel_dev(const Vector& got, const Vector& want) {
  double d = 0.0, n = 0.0;
  for (std::size_t i = 0; i < got.size(); ++i) {
    d = std::max(d, std::abs(got[i] - want[i]));
    n = std::max(n, std::abs(want[i]));
  }
  return d / std::max(1.0, n);
}

/// Exact per-sample gradient variance at (x, y): (1/N) sum |g_i - mean|^2.
std::pair<double, double> sample_variance(const ProblemInstance& p, const Vector& x, const Vector& y) {
  const std::size_t n = std::get<FiniteSum>(p.regime()).n;
  const auto [mx, my] = reference_full_grad(p, x, y);
  Vector gx(p.dim_x()), gy(p.dim_y());
  double vx = 0.0, vy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    p.oracle->grad(x, y, SampleId{i}, gx, gy);
    for (std::size_t j = 0; j < gx.size(); ++j) vx += (gx[j] - mx[j]) * (gx[j] - mx[j]);
    for (std::size_t j = 0; j < gy.size(); ++j) vy += (gy[j] - my[j]) * (gy[j] - my[j]);
  }
  return {vx / static_cast<double>(n), vy / static_cast<double>(n)};
}

}  // namespace

SuiteResult suite_estimator() {
  SuiteResult r;
  const QuadraticSaddle q = random_quadratic(8, 8, 64, 0.3, 0.5, 11);
  const ProblemInstance& p = q.problem;
  Rng rng(11, 1);

  // Anchor at several points, bit-for-bit against the reference sum.
  std::size_t mismatches = 0;
  for (int t = 0; t < 10; ++t) {
    const Vector x = rng.uniform_vector(8, -2.0, 2.0), y = rng.uniform_vector(8, -2.0, 2.0);
    const EstimatorState s = anchor(p, x, y, 1, BatchKey{1, 0, 0});
    const auto [gx, gy] = reference_full_grad(p, x, y);
    if (!bit_equal(s.gx, gx) || !bit_equal(s.gy, gy)) ++mismatches;
  }
  r.checks.push_back(check("anchor equals full gradient", mismatches == 0,
                           fmt("%zu of 10 anchors differ in any bit", mismatches)));

  // M = N recursion along a 10-step random walk.
  Vector x = rng.uniform_vector(8, -2.0, 2.0), y = rng.uniform_vector(8, -2.0, 2.0);
  EstimatorState s = anchor(p, x, y, 1, BatchKey{2, 0, 0});
  double worst = 0.0;
  for (std::size_t t = 1; t <= 10; ++t) {
    for (double& v : x) v += 0.2 * rng.normal();
    for (double& v : y) v += 0.2 * rng.normal();
    x = p.set_x.project(x);
    y = p.set_y.project(y);
    s = recurse(std::move(s), p, x, y, 64, BatchKey{2, 0, t});
    const auto [gx, gy] = reference_full_grad(p, x, y);
    worst = std::max({worst, rel_dev(s.gx, gx), rel_dev(s.gy, gy)});
  }
  r.checks.push_back(check("M = N recursion stays exact", worst <= 1e-12,
                           fmt("max relative deviation %.3g over 10 steps (tolerance 1e-12)", worst)));
  return r;
}

SuiteResult suite_estimator_error() {
  SuiteResult r;
  constexpr std::size_t N = 1024, d = 16, M = 8, T = 8, trials = 10000;
  const QuadraticSaddle q = random_quadratic(d, d, N, 0.1, 1.0, 21);
  const ProblemInstance& p = q.problem;

  SolverConfig c;
  c.K = 1;
  c.T = T;
  c.M = M;
  c.B = N;
  c.alpha_x = 0.05;
  c.alpha_y = 0.05;
  c.beta = 0.5;
  c.r = 1.0;
  c.seed = 21;
  std::vector<std::pair<Vector, Vector>> traj;
  IterateState st = initial_state(p, c);
  traj.emplace_back(st.x, st.y);
  for (std::size_t t = 1; t < T; ++t) {
    st = step(p, c, std::move(st));
    traj.emplace_back(st.x, st.y);
  }

  const std::vector<EstimatorMseRow> rows = estimator_mse(p, traj, M, N, trials, 99);
  std::size_t violations = 0;
  double worst_ratio = 0.0;
  for (const EstimatorMseRow& row : rows) {
    if (row.mse_x > row.bound_x + 5.0 * row.se_x) ++violations;
    if (row.mse_y > row.bound_y + 5.0 * row.se_y) ++violations;
    if (row.bound_x > 0.0) worst_ratio = std::max(worst_ratio, row.mse_x / row.bound_x);
    if (row.bound_y > 0.0) worst_ratio = std::max(worst_ratio, row.mse_y / row.bound_y);
  }
  r.checks.push_back(check("MSE within bound + 5 SE at every tau", violations == 0,
                           fmt("%zu violations over %zu steps, max MSE/bound %.3g", violations,
                               rows.size(), worst_ratio)));

  const auto [vx, vy] = sample_variance(p, traj.back().first, traj.back().second);
  const double plain = (vx + vy) / static_cast<double>(M);
  const double spider = rows.back().mse_x + rows.back().mse_y;
  r.checks.push_back(check("end-of-epoch MSE <= half plain minibatch MSE", spider <= 0.5 * plain,
                           fmt("SPIDER %.4g vs plain size-%zu minibatch %.4g (ratio %.3g)", spider, M,
                               plain, spider / plain)));
  return r;
}

}  // namespace sgda::verify
