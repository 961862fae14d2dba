#include "sgda/diagnostics.hpp"

#include <cmath>
#include <limits>

namespace sgda {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vector random_point(const ConstraintSet& set, std::uint64_t seed, std::uint64_t which) {
  const BatchKey key{seed, which, 0, streams::multistart};
  const std::size_t n = set.dim();
  Vector p(n);
  if (const auto* b = std::get_if<Box>(&set.kind())) {
    for (std::size_t i = 0; i < n; ++i)
      p[i] = b->lo[i] + (b->hi[i] - b->lo[i]) * unit_double(counter_hash(key, i));
  } else if (const auto* ball = std::get_if<Ball>(&set.kind())) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = normal_from(counter_hash(key, 2 * i), counter_hash(key, 2 * i + 1));
      s += p[i] * p[i];
    }
    const double radius = ball->radius * std::pow(unit_double(counter_hash(key, 2 * n)), 1.0 / n);
    const double scale = s > 0.0 ? radius / std::sqrt(s) : 0.0;
    for (std::size_t i = 0; i < n; ++i) p[i] = ball->center[i] + scale * p[i];
  } else if (std::holds_alternative<Simplex>(set.kind())) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = -std::log(1.0 - unit_double(counter_hash(key, i)));
      s += p[i];
    }
    for (double& e : p) e /= s;
  } else {
    for (std::size_t i = 0; i < n; ++i) p[i] = 2.0 * unit_double(counter_hash(key, i)) - 1.0;
  }
  return set.project(p);
}

}  // namespace

Residuals gs_residuals(const ProblemInstance& problem, VecView x, VecView y) {
  if (!is_finite_sum(problem.regime()))
    throw RegimeError("gs_residuals needs exact gradients; use gs_residuals_mc online");
  Vector gx(problem.dim_x()), gy(problem.dim_y());
  full_grad(problem, x, y, gx, gy);
  for (double& e : gy) e = -e;
  return {problem.set_x.normal_cone_dist(x, gx), problem.set_y.normal_cone_dist(y, gy)};
}

ResidualEstimate gs_residuals_mc(const ProblemInstance& problem, VecView x, VecView y,
                                 std::size_t batch, std::uint64_t seed) {
  constexpr std::size_t kGroups = 10;
  if (batch < kGroups) throw ConfigError("gs_residuals_mc: batch must be at least 10");
  const std::size_t dx = problem.dim_x(), dy = problem.dim_y();
  const auto ids = problem.oracle->draw(BatchKey{seed, 0, 0, streams::monte_carlo}, batch);
  std::vector<Vector> gxs(kGroups, Vector(dx, 0.0)), gys(kGroups, Vector(dy, 0.0));
  std::vector<std::size_t> counts(kGroups, 0);
  Vector tx(dx), ty(dy);
  for (std::size_t i = 0; i < batch; ++i) {
    problem.oracle->grad(x, y, ids[i], tx, ty);
    const std::size_t g = i % kGroups;
    axpy(1.0, tx, gxs[g]);
    axpy(1.0, ty, gys[g]);
    counts[g] += 1;
  }
  Vector mx(dx, 0.0), my(dy, 0.0);
  std::vector<Residuals> parts(kGroups);
  for (std::size_t g = 0; g < kGroups; ++g) {
    axpy(1.0, gxs[g], mx);
    axpy(1.0, gys[g], my);
    for (double& e : gxs[g]) e /= static_cast<double>(counts[g]);
    for (double& e : gys[g]) e = -e / static_cast<double>(counts[g]);
    parts[g] = {problem.set_x.normal_cone_dist(x, gxs[g]), problem.set_y.normal_cone_dist(y, gys[g])};
  }
  for (double& e : mx) e /= static_cast<double>(batch);
  for (double& e : my) e = -e / static_cast<double>(batch);
  ResidualEstimate out;
  out.value = {problem.set_x.normal_cone_dist(x, mx), problem.set_y.normal_cone_dist(y, my)};
  double ax = 0, ay = 0, qx = 0, qy = 0;
  for (const auto& p : parts) {
    ax += p.res_x;
    ay += p.res_y;
  }
  ax /= kGroups;
  ay /= kGroups;
  for (const auto& p : parts) {
    qx += (p.res_x - ax) * (p.res_x - ax);
    qy += (p.res_y - ay) * (p.res_y - ay);
  }
  const double k = static_cast<double>(kGroups);
  out.standard_error = {std::sqrt(qx / (k - 1.0) / k), std::sqrt(qy / (k - 1.0) / k)};
  return out;
}

double regularized_value(const ProblemInstance& problem, double r, VecView x, VecView y,
                         VecView z) {
  return full_value(problem, x, y) + 0.5 * r * sq_distance(x, z);
}

InnerSolution solve_x_r(const ProblemInstance& problem, double r, VecView y, VecView z,
                        const InnerSolveConfig& cfg, const Vector* warm) {
  if (!(r > problem.meta.rho)) throw ConfigError("solve_x_r: r must exceed rho");
  if (!(cfg.tol > 0.0)) throw ConfigError("solve_x_r: tol must be positive");
  check_dim(z.size(), problem.dim_x(), "solve_x_r z");
  const double s = cfg.step.value_or(1.0 / (r + problem.meta.L_x));
  if (!(s > 0.0)) throw ConfigError("solve_x_r: step must be positive");
  const ConstraintSet& X = problem.set_x;
  Vector x = warm ? X.project(*warm) : X.project(z);
  Vector best = x;
  double best_res = kInf;
  Vector trial(x.size()), next(x.size());
  for (std::size_t it = 0; it < cfg.max_iters; ++it) {
    Vector g = full_grad_x(problem, x, y);
    kernels::active().primal_step(x.data(), g.data(), z.data(), s, r, trial.data(), x.size());
    X.project_into(trial, next);
    const double res = distance(x, next) / s;
    if (res < best_res) {
      best_res = res;
      best = x;
    }
    if (res <= cfg.tol) return {x, res, it};
    if (!all_finite(next)) break;
    x.swap(next);
  }
  throw MaxItersError("solve_x_r did not reach the tolerance", best, best_res);
}

double dz_norm(const ProblemInstance& problem, double r, VecView y, VecView z,
               const InnerSolveConfig& cfg) {
  const InnerSolution sol = solve_x_r(problem, r, y, z, cfg);
  return r * distance(z, sol.x);
}

namespace {

struct DualEval {
  double value;
  Vector grad;
  Vector x_r;
};

class DualFunction {
public:
  DualFunction(const ProblemInstance& p, double r, VecView z, const InnerSolveConfig& cfg)
      : p_(p), r_(r), z_(z.begin(), z.end()), cfg_(cfg) {}

  DualEval operator()(VecView y, const Vector* warm) const {
    InnerSolution s = solve_x_r(p_, r_, y, z_, cfg_, warm);
    DualEval e;
    e.value = regularized_value(p_, r_, s.x, y, z_);
    e.grad = full_grad_y(p_, s.x, y);
    e.x_r = std::move(s.x);
    return e;
  }

private:
  const ProblemInstance& p_;
  double r_;
  Vector z_;
  InnerSolveConfig cfg_;
};

// Projected gradient ascent on d_r(., z) from y0.
std::pair<Vector, DualEval> ascend(const ProblemInstance& p, const DualFunction& D, double r,
                                   Vector y, const LyapunovConfig& cfg, const Vector* warm) {
  const double Ly = p.meta.L_y;
  const double eta = Ly > 0.0 ? 1.0 / (Ly * (1.0 + Ly / (r - p.meta.rho))) : 1.0;
  DualEval e = D(y, warm);
  Vector next(y.size()), trial(y.size());
  for (std::size_t it = 0; it < cfg.ascent_iters; ++it) {
    trial = y;
    axpy(eta, e.grad, trial);
    p.set_y.project_into(trial, next);
    if (distance(next, y) / eta <= cfg.ascent_tol) break;
    DualEval en = D(next, &e.x_r);
    if (en.value < e.value) {
      // Step too long for the local curvature: shrink once and retry.
      trial = y;
      axpy(0.5 * eta, e.grad, trial);
      p.set_y.project_into(trial, next);
      en = D(next, &e.x_r);
      if (en.value < e.value) break;
    }
    y = next;
    e = std::move(en);
  }
  return {y, std::move(e)};
}

}  // namespace

LyapunovValue lyapunov(const ProblemInstance& problem, double r, VecView x, VecView y, VecView z,
                       const LyapunovConfig& cfg) {
  LyapunovTracker t(problem, r, cfg);
  return t.evaluate(x, y, z);
}

LyapunovTracker::LyapunovTracker(const ProblemInstance& problem, double r, LyapunovConfig cfg)
    : problem_(problem), r_(r), cfg_(cfg) {
  if (!is_finite_sum(problem.regime())) throw RegimeError("lyapunov needs a finite-sum problem");
  if (!(r > problem.meta.rho)) throw ConfigError("lyapunov: r must exceed rho");
}

LyapunovValue LyapunovTracker::evaluate(VecView x, VecView y, VecView z) {
  const ProblemInstance& p = problem_;
  const DualFunction D(p, r_, z, cfg_.inner);
  LyapunovValue out;
  out.F_r = regularized_value(p, r_, x, y, z);
  DualEval at_y = D(y, nullptr);
  out.d_r = at_y.value;
  out.x_r = at_y.x_r;

  std::vector<Vector> starts;
  starts.emplace_back(y.begin(), y.end());
  if (last_y_star_) starts.push_back(*last_y_star_);
  out.certified = false;
  if (p.dim_y() == 1) {
    // Grid over the interval Y, then polish the best grid point.
    double lo = 0.0, hi = 0.0;
    if (const auto* b = std::get_if<Box>(&p.set_y.kind())) {
      lo = b->lo[0];
      hi = b->hi[0];
    } else if (const auto* ball = std::get_if<Ball>(&p.set_y.kind())) {
      lo = ball->center[0] - ball->radius;
      hi = ball->center[0] + ball->radius;
    } else {
      lo = hi = 1.0;
    }
    const std::size_t n = std::max<std::size_t>(cfg_.grid_points, 2);
    double best = -kInf;
    Vector best_y{lo};
    Vector warm = at_y.x_r;
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / static_cast<double>(n - 1);
      Vector yy{lo + (hi - lo) * t};
      const DualEval e = D(yy, &warm);
      warm = e.x_r;
      if (e.value > best) {
        best = e.value;
        best_y = yy;
      }
    }
    starts.push_back(best_y);
    out.certified = true;
  } else {
    starts.push_back(p.set_y.default_point());
    while (starts.size() < cfg_.starts)
      starts.push_back(random_point(p.set_y, cfg_.seed, starts.size()));
  }

  double best = out.d_r;
  out.y_star.assign(y.begin(), y.end());
  for (const Vector& s : starts) {
    auto [ys, e] = ascend(p, D, r_, s, cfg_, &out.x_r);
    if (e.value > best) {
      best = e.value;
      out.y_star = ys;
    }
  }
  out.p_r = best;
  last_y_star_ = out.y_star;
  out.phi = (out.F_r - out.d_r) + (out.p_r - out.d_r) + out.p_r;
  return out;
}

double fd_check(const std::function<double(VecView)>& value_fn, VecView grad, VecView point,
                double h) {
  check_dim(grad.size(), point.size(), "fd_check gradient");
  Vector p(point.begin(), point.end());
  double worst = 0.0;
  const double denom = std::max(1.0, norm(grad));
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double orig = p[i];
    p[i] = orig + h;
    const double fp = value_fn(p);
    p[i] = orig - h;
    const double fm = value_fn(p);
    p[i] = orig;
    const double fd = (fp - fm) / (2.0 * h);
    worst = std::max(worst, std::abs(fd - grad[i]) / denom);
  }
  return worst;
}

double fd_check(const std::function<double(VecView)>& value_fn,
                const std::function<Vector(VecView)>& grad_fn, VecView point, double h) {
  const Vector g = grad_fn(point);
  return fd_check(value_fn, g, point, h);
}

DiagnosticsSink::DiagnosticsSink(const ProblemInstance& problem, std::size_t stride,
                                 std::optional<double> r, LyapunovConfig cfg)
    : problem_(problem), stride_(stride == 0 ? 1 : stride) {
  if (r) tracker_.emplace(problem, *r, cfg);
}

void DiagnosticsSink::on_row(TraceRow& row, const IterateState& state) {
  const bool due = seen_ % stride_ == 0;
  ++seen_;
  if (!due) return;
  if (is_finite_sum(problem_.regime())) {
    const Residuals res = gs_residuals(problem_, state.x, state.y);
    row.res_x = res.res_x;
    row.res_y = res.res_y;
    if (tracker_) row.lyapunov = tracker_->evaluate(state.x, state.y, state.z).phi;
  } else {
    const ResidualEstimate est = gs_residuals_mc(problem_, state.x, state.y);
    row.res_x = est.value.res_x;
    row.res_y = est.value.res_y;
  }
}

}  // namespace sgda
