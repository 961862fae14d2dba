#include <doctest.h>

#include <cmath>

#include "sgda/diagnostics.hpp"
#include "sgda/problems.hpp"
#include "support.hpp"

using namespace sgda;

namespace {

QuadraticSaddle convex3(double box) {
  QuadraticSaddleSpec s;
  Eigen::MatrixXd G(3, 3);
  G << 1.0, 0.2, -0.3, 0.1, 0.8, 0.4, -0.2, 0.3, 1.1;
  s.A = G.transpose() * G;
  s.B = Eigen::MatrixXd(3, 1);
  s.B << 0.5, -0.2, 0.3;
  s.C = Eigen::MatrixXd::Identity(1, 1);
  s.a = Eigen::Vector3d(0.1, -0.4, 0.2);
  s.N = 4;
  s.heterogeneity = 0.05;
  s.seed = 2;
  s.set_x = ConstraintSet::box(3, -box, box);
  s.set_y = ConstraintSet::box(1, -box, box);
  return make_quadratic_saddle(s);
}

}  // namespace

TEST_CASE("game-stationarity residuals") {
  const QuadraticSaddle q = convex3(10.0);
  const Residuals r0 = gs_residuals(q.problem, q.x_star, q.y_star);
  CHECK(r0.res_x <= 1e-12);
  CHECK(r0.res_y <= 1e-12);

  const ProblemInstance xy = test::bilinear_problem();
  const Residuals r = gs_residuals(xy, Vector{1.0}, Vector{1.0});
  CHECK(r.res_x == 1.0);
  CHECK(r.res_y == 0.0);  // y = 1 is pushed further up, absorbed by N_Y(1)

  auto online = std::make_shared<test::FnOracle>(
      1, 1, 0, [](VecView x, VecView y, std::size_t) { return x[0] * y[0]; },
      [](VecView, VecView y, std::size_t, VecMut g) { g[0] = y[0]; },
      [](VecView x, VecView, std::size_t, VecMut g) { g[0] = x[0]; });
  online->online = true;
  const auto po = make_problem(online, ConstraintSet::box(1, -1, 1), ConstraintSet::box(1, -1, 1), SmoothnessMeta{});
  CHECK_THROWS_AS(gs_residuals(po, Vector{0.5}, Vector{0.5}), RegimeError);
  const ResidualEstimate est = gs_residuals_mc(po, Vector{0.0}, Vector{0.5}, 1000, 1);
  CHECK(est.value.res_x == doctest::Approx(0.5));
  CHECK(est.standard_error.res_x == 0.0);
}

TEST_CASE("inner minimization") {
  const ProblemInstance xy = test::bilinear_problem();
  // 2x + x^2/2 over [-1, 1]
  const InnerSolution s = solve_x_r(xy, 1.0, Vector{2.0}, Vector{0.0});
  CHECK(s.x[0] == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(dz_norm(xy, 1.0, Vector{2.0}, Vector{0.0}) == doctest::Approx(1.0).epsilon(1e-10));
  // pinned at the boundary: linear in r while the minimizer stays there
  CHECK(dz_norm(xy, 0.5, Vector{2.0}, Vector{0.0}) == doctest::Approx(0.5).epsilon(1e-10));

  // proximal dominance
  const Vector far = solve_x_r(xy, 1e6, Vector{0.3}, Vector{0.4}).x;
  CHECK(far[0] == doctest::Approx(0.4).epsilon(1e-5));
  CHECK(solve_x_r(xy, 1e6, Vector{0.3}, Vector{3.0}).x[0] == doctest::Approx(1.0).epsilon(1e-5));

  // convex quadratic in 3-D against the linear system (A + r I) x = r z - B y - a
  const QuadraticSaddle q = convex3(10.0);
  const double r = 0.7;
  const Vector y{0.4}, z{0.2, -0.1, 0.3};
  const Eigen::Vector3d ez(z[0], z[1], z[2]);
  const Eigen::VectorXd ref = (q.A + r * Eigen::MatrixXd::Identity(3, 3))
                                  .ldlt()
                                  .solve(r * ez - q.B * Eigen::VectorXd::Constant(1, y[0]) - q.a);
  InnerSolveConfig cfg;
  cfg.tol = 1e-11;
  const InnerSolution sx = solve_x_r(q.problem, r, y, z, cfg);
  for (int i = 0; i < 3; ++i) CHECK(sx.x[static_cast<std::size_t>(i)] == doctest::Approx(ref[i]).epsilon(1e-7));
  CHECK(sx.residual <= cfg.tol);

  // the minimizer of F(., y) is a fixed point of the proximal map
  const Eigen::VectorXd xm = q.A.ldlt().solve(-q.B * Eigen::VectorXd::Constant(1, y[0]) - q.a);
  CHECK(dz_norm(q.problem, r, y, Vector(xm.data(), xm.data() + 3), cfg) <= 1e-9);

  InnerSolveConfig tight;
  tight.max_iters = 1;
  tight.tol = 1e-300;
  CHECK_THROWS_AS(solve_x_r(q.problem, r, y, z, tight), MaxItersError);
}

TEST_CASE("Lyapunov collapses to p_r at the inner solutions") {
  const QuadraticSaddle q = convex3(10.0);
  const double r = 1.0;
  const Vector z{0.2, -0.1, 0.3};
  const Vector y = q.y_max(r, z);
  const Vector x = q.x_r(r, y, z);
  LyapunovConfig cfg;
  cfg.inner.tol = 1e-11;
  const LyapunovValue v = lyapunov(q.problem, r, x, y, z, cfg);
  CHECK(v.phi == doctest::Approx(q.p_r(r, z)).epsilon(1e-8));
  CHECK(v.certified);
  for (const Vector& yy : {Vector{-0.5}, Vector{0.9}}) {
    const LyapunovValue w = lyapunov(q.problem, r, Vector{0.5, 0.5, -0.5}, yy, z, cfg);
    CHECK(w.phi >= w.p_r - 1e-9);
    CHECK(w.phi >= v.phi - 1e-9);
  }
}

TEST_CASE("finite differences") {
  auto lin = [](VecView v) { return 2 * v[0] - 3 * v[1] + 0.5; };
  CHECK(fd_check(lin, Vector{2, -3}, Vector{0.3, -0.7}) <= 1e-10);
  auto quad = [](VecView v) { return v[0] * v[0] + 3 * v[0] * v[1]; };
  auto grad = [](VecView v) { return Vector{2 * v[0] + 3 * v[1], 3 * v[0]}; };
  CHECK(fd_check(quad, grad, Vector{0.3, -0.7}) <= 1e-9);
  CHECK(fd_check(quad, Vector{0, 0}, Vector{0.3, -0.7}) > 0.1);
}

TEST_CASE("diagnostics sink fills residuals at its stride") {
  const QuadraticSaddle q = convex3(10.0);
  SolverConfig c;
  c.K = 3;
  c.T = 2;
  c.M = 4;
  c.alpha_x = c.alpha_y = 0.1;
  c.r = 1.0;
  c.beta = 0.5;
  DiagnosticsSink sink(q.problem, 2, 1.0);
  const RunTrace t = run(q.problem, c, &sink);
  REQUIRE(t.rows.size() == 6);
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    CHECK(t.rows[i].res_x.has_value() == (i % 2 == 0));
    CHECK(t.rows[i].lyapunov.has_value() == (i % 2 == 0));
  }
}
