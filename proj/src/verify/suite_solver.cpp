#include <algorithm>
#include <chrono>
#include <cmath>

#include "common.hpp"
#include "sgda/diagnostics.hpp"
#include "sgda/solver.hpp"
#include "sgda/tuner.hpp"

namespace sgda::verify {

namespace {

/// Phi_r from the closed forms: F_r - 2 d_r + 2 p_r.
double closed_form_phi(const QuadraticSaddle& q, double r, const Vector& x, const Vector& y,
                       const Vector& z) {
  const double Fr = q.value(x, y) + 0.5 * r * sq_distance(x, z);
  return Fr - 2.0 * q.d_r(r, y, z) + 2.0 * q.p_r(r, z);
}

TunedSchedule tuned_fixture_schedule(const QuadraticSaddle& q, double epsilon) {
  const ProblemInstance& p = q.problem;
  const double r = compute_r(p.meta);
  const Vector x0 = p.set_x.default_point(), y0 = p.set_y.default_point();
  const double dphi = closed_form_phi(q, r, x0, y0, x0) - q.value(q.x_star, q.y_star);
  TunerInput in = tuner_input_for(p, epsilon, dphi);
  return tune_smooth(in);
}

bool inside(const ConstraintSet& s, const Vector& v) { return s.contains(v, 0.0); }

/// Convex in x, strongly concave (hence PL) in y, interior saddle.
QuadraticSaddle pl_quadratic(std::size_t d, std::size_t N, std::uint64_t seed) {
  Rng rng(seed, 200);
  const auto e = static_cast<Eigen::Index>(d);
  const double sc = 1.0 / std::sqrt(static_cast<double>(d));
  QuadraticSaddleSpec s;
  const Eigen::MatrixXd G = rng.normal_matrix(e, e, sc), H = rng.normal_matrix(e, e, sc);
  s.A = G.transpose() * G + 0.5 * Eigen::MatrixXd::Identity(e, e);
  s.B = rng.normal_matrix(e, e, sc);
  s.C = H.transpose() * H + 0.5 * Eigen::MatrixXd::Identity(e, e);
  s.a = rng.normal_matrix(e, 1, 0.5);
  s.b = rng.normal_matrix(e, 1, 0.5);
  s.N = N;
  s.heterogeneity = 0.2;
  s.offset_noise = 0.3;
  s.seed = seed;
  s.set_x = ConstraintSet::box(d, -10.0, 10.0);
  s.set_y = ConstraintSet::box(d, -10.0, 10.0);
  return make_quadratic_saddle(s);
}

}  // namespace

SuiteResult suite_convergence() {
  SuiteResult r;
  const QuadraticSaddle q = saddle_fixture();
  const ProblemInstance& p = q.problem;
  constexpr double eps = 1e-3;

  TunedSchedule ts;
  try {
    ts = tuned_fixture_schedule(q, eps);
  } catch (const std::exception& e) {
    r.checks.push_back(check("tuned schedule", false, std::string("tuner failed: ") + e.what()));
    return r;
  }
  SolverConfig c = ts.config;
  c.record_trace = false;
  c.seed = 4;
  const double kt = static_cast<double>(c.K) * static_cast<double>(c.T);
  r.checks.push_back(check("tuned schedule", q.saddle_interior,
                           fmt("r=%.6g alpha_x=%.4g alpha_y=%.4g beta=%.4g T=M=%zu K=%zu (KT=%.4g)",
                               c.r, c.alpha_x, c.alpha_y, c.beta, c.T, c.K, kt)));

  const RunTrace t = run(p, c);
  const Residuals res = gs_residuals(p, t.output_x, t.output_y);
  const double dist = std::hypot(distance(t.final_x, q.x_star), distance(t.final_y, q.y_star));
  const double dz = dz_norm(p, c.r, t.output_y, t.output_z);
  r.checks.push_back(check("gs residuals at output <= 1e-3", res.res_x <= eps && res.res_y <= eps,
                           fmt("res_x %.3g, res_y %.3g", res.res_x, res.res_y)));
  r.checks.push_back(check("final iterate within 1e-2 of saddle", dist <= 1e-2,
                           fmt("distance %.3g", dist)));
  r.checks.push_back(check("dz_norm at output <= 1e-2", dz <= 1e-2,
                           fmt("dz_norm %.3g; z moved %.3g from its start (saddle at distance %.3g)",
                               dz, distance(t.final_z, p.set_x.default_point()),
                               distance(q.x_star, p.set_x.default_point()))));
  return r;
}

SuiteResult suite_lyapunov() {
  SuiteResult r;
  const QuadraticSaddle q = saddle_fixture();
  const ProblemInstance& p = q.problem;
  const TunedSchedule ts = tuned_fixture_schedule(q, 1e-3);
  SolverConfig c = ts.config;
  c.seed = 12;
  const double rr = c.r;

  LyapunovConfig lc;
  lc.inner.tol = 1e-11;
  LyapunovTracker tracker(p, rr, lc);
  IterateState s = initial_state(p, c);
  double worst = std::numeric_limits<double>::infinity();
  double inner_dev = 0.0;
  double phi0 = 0.0, phi_last = 0.0;
  bool interior = true;
  for (int t = 0; t <= 50; ++t) {
    if (t > 0) s = step(p, c, std::move(s));
    const LyapunovValue v = tracker.evaluate(s.x, s.y, s.z);
    const double pr = q.p_r(rr, s.z);
    interior = interior && inside(p.set_x, q.x_r(rr, s.y, s.z)) && inside(p.set_y, q.y_max(rr, s.z)) &&
               inside(p.set_x, q.x_r(rr, q.y_max(rr, s.z), s.z));
    worst = std::min(worst, v.phi - pr);
    inner_dev = std::max(inner_dev, std::abs(v.phi - closed_form_phi(q, rr, s.x, s.y, s.z)));
    if (t == 0) phi0 = v.phi;
    phi_last = v.phi;
  }
  r.checks.push_back(check("closed forms valid (interior inner solutions)", interior,
                           interior ? "x_r and y_max interior along the trajectory"
                                    : "an inner solution left the box"));
  r.checks.push_back(check("Phi_r >= p_r - 1e-6", worst >= -1e-6,
                           fmt("min Phi_r - p_r over 51 points %.3g", worst)));
  r.checks.push_back(check("numeric Phi_r matches closed form", inner_dev <= 1e-6,
                           fmt("max deviation %.3g", inner_dev)));
  r.checks.push_back(check("final Phi_r <= initial", phi_last <= phi0,
                           fmt("initial %.12g, final %.12g", phi0, phi_last)));
  return r;
}

SuiteResult suite_complexity_trend() {
  SuiteResult r;
  const QuadraticSaddle q = pl_quadratic(4, 32, 31);
  const ProblemInstance& p = q.problem;
  SolverConfig c;
  c.K = 1000000;
  c.T = 4;
  c.M = 4;
  c.B = 32;
  const double L = std::max(p.meta.L_x, p.meta.L_y);
  c.alpha_x = 0.2 / L;
  c.alpha_y = 0.2 / L;
  c.r = 1.0;
  c.beta = 0.5;
  c.seed = 31;
  c.record_trace = false;

  const double targets[3] = {1e-1, 3e-2, 1e-2};
  std::size_t hit[3] = {0, 0, 0};
  IterateState s = initial_state(p, c);
  double sum = 0.0;
  std::size_t n = 0;
  constexpr std::size_t max_steps = 4000000;
  while (hit[2] == 0 && n < max_steps) {
    s = step(p, c, std::move(s));
    ++n;
    const Residuals res = gs_residuals(p, s.x, s.y);
    sum += res.res_x * res.res_x + res.res_y * res.res_y;
    // E|res(output)|^2 for an output drawn uniformly from the first n iterates.
    const double mean = sum / static_cast<double>(n);
    for (int i = 0; i < 3; ++i)
      if (hit[i] == 0 && mean <= targets[i] * targets[i]) hit[i] = n;
  }
  if (hit[2] == 0) {
    r.checks.push_back(check("targets reached", false, fmt("epsilon 1e-2 not reached in %zu steps", n)));
    return r;
  }
  // Least-squares slope of log n against log(1/epsilon).
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < 3; ++i) mx += std::log(1.0 / targets[i]) / 3.0, my += std::log(double(hit[i])) / 3.0;
  double sxy = 0.0, sxx = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double dx = std::log(1.0 / targets[i]) - mx;
    sxy += dx * (std::log(double(hit[i])) - my);
    sxx += dx * dx;
  }
  const double slope = sxy / sxx;
  r.checks.push_back(check("log-log slope in [1.2, 2.8]", slope >= 1.2 && slope <= 2.8,
                           fmt("n(eps) = %zu, %zu, %zu for eps = 1e-1, 3e-2, 1e-2; slope %.3f", hit[0],
                               hit[1], hit[2], slope)));
  return r;
}

SuiteResult suite_group_dro() {
  SuiteResult r;
  std::size_t wins = 0;
  std::string detail;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SyntheticGroupRegression g;
    g.seed = seed;
    const Dataset data = make_synthetic_group_regression(g);
    const GroupDroSpec spec = group_spec_from_dataset(data, Loss::squared);
    const ProblemInstance p = make_group_dro_problem(spec);
    const Vector erm = erm_least_squares(spec);
    const Vector erm_losses = group_losses(spec, erm);
    const double erm_worst = *std::max_element(erm_losses.begin(), erm_losses.end());

    SolverConfig c;
    c.K = 2000;
    c.T = 10;
    c.M = 10;
    c.B = data.features.rows();
    c.alpha_x = 0.05;
    c.alpha_y = 0.05;
    c.r = 1.0;
    c.beta = 0.1;
    c.seed = seed;
    c.record_trace = false;
    const RunTrace t = run(p, c);
    const Vector out_losses = group_losses(spec, t.output_x);
    const double worst = *std::max_element(out_losses.begin(), out_losses.end());
    if (worst <= 0.95 * erm_worst) ++wins;
    detail += fmt("%sseed %llu: %.3f vs ERM %.3f", seed > 1 ? "; " : "",
                  static_cast<unsigned long long>(seed), worst, erm_worst);
  }
  r.checks.push_back(check("worst-group loss <= 0.95 x ERM on 5 seeds", wins == 5, detail));
  return r;
}

}  // namespace sgda::verify
