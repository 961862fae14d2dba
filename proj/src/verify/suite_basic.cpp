#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>

#include "common.hpp"
#include "sgda/solver.hpp"
#include "sgda/tuner.hpp"

namespace sgda::verify {

SuiteResult suite_kl_example() {
  SuiteResult r;
  const ConstraintSet Y = ConstraintSet::box(1, -2.0, 2.0);
  std::size_t violations = 0, points = 0;
  double worst = std::numeric_limits<double>::infinity();
  double worst_y = 0.0;
  for (int i = 0; i <= 4000; ++i) {
    const double y = std::min(2.0, -2.0 + i * 1e-3);
    const double lhs = Y.normal_cone_dist(Vector{y}, Vector{-kl_example_grad(y)});
    const double rhs = 0.1 * std::sqrt(2.0 - kl_example_value(y));
    ++points;
    if (!(lhs >= rhs)) ++violations;
    if (lhs - rhs < worst) {
      worst = lhs - rhs;
      worst_y = y;
    }
  }
  r.checks.push_back(check("grid inequality", violations == 0,
                           fmt("%zu points, %zu violations, min margin %.3g at y=%.3f", points,
                               violations, worst, worst_y)));
  const double g0 = kl_example_value(0.0);
  const double g_left = 2.0 * std::exp(0.0) - 1.0, g_mid = -1.0 + 2.0;
  const double d2 = kl_example_grad(-2.0);
  r.checks.push_back(check("reference values",
                           g0 == 2.0 && kl_example_value(-1.0) == g_left && g_left == g_mid &&
                               std::abs(d2 - 2.0 * std::exp(-1.0)) <= 1e-15,
                           fmt("g(0)=%.17g g(-1)=%.17g g'(-2)=%.17g", g0, kl_example_value(-1.0), d2)));
  return r;
}

SuiteResult suite_tuner() {
  SuiteResult r;
  SmoothnessMeta m;
  m.L_x = m.L_y = m.rho = m.ell = m.mu = m.D_Y = 1.0;
  m.theta = 0.5;
  const double rr = compute_r(m);
  const double ax = compute_alpha_x(m, rr);
  const double want = 1.0 / 8148.0;
  const double ulps = std::abs(ax - want) / (std::nextafter(want, 1.0) - want);
  r.checks.push_back(check("r", rr == 676.0, fmt("r = %.17g (want 676)", rr)));
  r.checks.push_back(check("alpha_x", ulps <= 1.0, fmt("alpha_x = %.17g, %.0f ulp from 1/8148", ax, ulps)));
  const double lo = alpha_x_lower_bound(m, rr);
  bool interval_ok = true;
  try {
    check_alpha_x_interval(m, rr, ax);
  } catch (const std::exception&) {
    interval_ok = false;
  }
  interval_ok = interval_ok && rr >= 2.0 * m.rho && rr >= m.L_y + m.rho && lo <= ax;
  r.checks.push_back(check("step-size interval", interval_ok,
                           fmt("%.6g <= alpha_x <= upper, r >= max(2 rho, L_y + rho)", lo)));

  TunerInput in;
  in.meta = m;
  in.epsilon = 0.1;
  in.regime = FiniteSum{8};
  const TunedSchedule s = tune_smooth(in);
  r.checks.push_back(check("pipeline", s.config.r == rr && s.config.alpha_x == ax &&
                                           s.audit.get("r") == rr && s.audit.get("alpha_x") == ax,
                           fmt("tune_smooth r=%.17g alpha_x=%.17g", s.config.r, s.config.alpha_x)));
  return r;
}

SuiteResult suite_output_sampling() {
  SuiteResult r;
  const ProblemInstance p = make_kl_example(1);
  SolverConfig c;
  c.K = 2;
  c.T = 4;
  c.M = 1;
  c.B = 1;
  c.alpha_x = 0.1;
  c.alpha_y = 0.1;
  c.beta = 0.5;
  c.r = 1.0;
  c.record_trace = false;
  constexpr std::size_t runs = 10000, bins = 8;
  std::size_t counts[bins] = {};
  bool in_range = true;
  for (std::size_t s = 0; s < runs; ++s) {
    c.seed = 1000 + s;
    const RunTrace t = run(p, c);
    if (t.output_index < 1 || t.output_index > bins) {
      in_range = false;
      continue;
    }
    ++counts[t.output_index - 1];
  }
  const double expected = static_cast<double>(runs) / bins;
  double chi2 = 0.0;
  std::string hist;
  for (std::size_t b = 0; b < bins; ++b) {
    const double d = static_cast<double>(counts[b]) - expected;
    chi2 += d * d / expected;
    hist += (b ? "," : "") + std::to_string(counts[b]);
  }
  const double pval = boost::math::gamma_q(0.5 * (bins - 1), 0.5 * chi2);
  r.checks.push_back(check("chi-square vs Uniform{1..8}", in_range && pval > 0.001,
                           fmt("counts [%s], chi2 = %.3f, p = %.4f", hist.c_str(), chi2, pval)));
  return r;
}

}  // namespace sgda::verify
