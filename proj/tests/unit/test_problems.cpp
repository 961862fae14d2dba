#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "sgda/diagnostics.hpp"
#include "sgda/problems.hpp"

using namespace sgda;

namespace {

// Zero features make the squared loss of a row its squared target.
GroupDroSpec two_groups(double loss0, double loss1) {
  GroupDroSpec s;
  s.features = {Eigen::MatrixXd::Zero(2, 1), Eigen::MatrixXd::Zero(3, 1)};
  s.targets = {Eigen::VectorXd::Constant(2, std::sqrt(loss0)), Eigen::VectorXd::Constant(3, std::sqrt(loss1))};
  return s;
}

PhiDivDroSpec phi_spec(Vector losses, double lambda, Loss loss = Loss::squared) {
  PhiDivDroSpec s;
  const auto n = static_cast<Eigen::Index>(losses.size());
  s.features = Eigen::MatrixXd::Zero(n, 1);
  s.targets.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) s.targets[i] = std::sqrt(losses[static_cast<std::size_t>(i)]);
  s.lambda_pen = lambda;
  s.loss = loss;
  return s;
}

}  // namespace

TEST_CASE("KL example values") {
  CHECK(kl_example_value(0.0) == 2.0);
  CHECK(kl_example_value(-1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(kl_example_value(-1.0 - 1e-12) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(kl_example_value(1.0 + 1e-12) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(kl_example_grad(-2.0) == doctest::Approx(2.0 * std::exp(-1.0)).epsilon(1e-15));
  CHECK(kl_example_grad(-1.0) == doctest::Approx(2.0));
  CHECK(kl_example_grad(1.0) == doctest::Approx(-2.0));
  CHECK(kl_example_grad(-1.0 - 1e-9) == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(kl_example_grad(1.0 + 1e-9) == doctest::Approx(-2.0).epsilon(1e-8));
  for (double y = -2.0; y <= 2.0; y += 0.01) CHECK(kl_example_value(y) <= 2.0);
  CHECK_THROWS_AS(kl_example_value(2.5), DomainError);
  CHECK_THROWS_AS(kl_example_grad(-2.01), DomainError);
  const ProblemInstance p = make_kl_example(3);
  CHECK(p.meta.mu == 0.1);
  CHECK(p.meta.theta == 0.5);
  CHECK(p.dim_x() == 3);
}

TEST_CASE("group DRO picks the worst group") {
  const ProblemInstance p = make_group_dro_problem(two_groups(1.0, 3.0));
  CHECK(full_value(p, Vector{0.7}, Vector{0.0, 1.0}) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(full_value(p, Vector{0.7}, Vector{1.0, 0.0}) == doctest::Approx(1.0).epsilon(1e-14));
  const Vector gy = full_grad_y(p, Vector{0.7}, Vector{0.5, 0.5});
  CHECK(gy[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(gy[1] == doctest::Approx(3.0).epsilon(1e-14));
  // the linear structure in q: central differences
  auto fq = [&](VecView q) { return full_value(p, Vector{0.7}, q); };
  CHECK(fd_check(fq, gy, Vector{0.5, 0.5}) <= 1e-9);

  const ProblemInstance same = make_group_dro_problem(two_groups(2.0, 2.0));
  CHECK(full_value(same, Vector{0.1}, Vector{0.2, 0.8}) ==
        doctest::Approx(full_value(same, Vector{0.1}, Vector{0.9, 0.1})).epsilon(1e-14));

  // composite form for the absolute loss agrees with mean absolute residuals
  GroupDroSpec abs = two_groups(1.0, 4.0);
  abs.loss = Loss::absolute;
  const MoreauComposite c = make_group_dro(abs);
  CHECK(full_nonsmooth_value(c, Vector{0.0}, Vector{0.25, 0.75}) == doctest::Approx(0.25 * 1 + 0.75 * 2));
}

TEST_CASE("ERM has a worse worst group than its average") {
  SyntheticGroupRegression g;
  g.seed = 4;
  const Dataset d = make_synthetic_group_regression(g);
  const GroupDroSpec spec = group_spec_from_dataset(d, Loss::squared);
  const Vector theta = erm_least_squares(spec);
  const Vector losses = group_losses(spec, theta);

  // Independent least squares through the normal equations.
  const Eigen::VectorXd ref = (d.features.transpose() * d.features).ldlt().solve(d.features.transpose() * d.targets);
  for (std::size_t i = 0; i < theta.size(); ++i) CHECK(theta[i] == doctest::Approx(ref[static_cast<Eigen::Index>(i)]).epsilon(1e-9));
  const double avg = (d.features * ref - d.targets).squaredNorm() / static_cast<double>(d.targets.size());
  CHECK(std::max(losses[0], losses[1]) > avg);
  CHECK(d.targets.size() == 400);
}

TEST_CASE("empty groups are rejected") {
  Dataset d;
  d.features = Eigen::MatrixXd::Ones(3, 1);
  d.targets = Eigen::VectorXd::Ones(3);
  d.group = {0, 2, 2};
  CHECK_THROWS_AS(group_spec_from_dataset(d, Loss::squared), EmptyGroupError);
  GroupDroSpec s = two_groups(1, 1);
  s.features[1] = Eigen::MatrixXd::Zero(0, 1);
  s.targets[1] = Eigen::VectorXd::Zero(0);
  CHECK_THROWS_AS(make_group_dro(s), EmptyGroupError);
}

TEST_CASE("phi-divergence DRO examples") {
  const ProblemInstance lin = make_phi_div_dro(phi_spec({0.0, 1.0}, 0.0));
  CHECK(full_value(lin, Vector{0.0}, Vector{0.0, 1.0}) == doctest::Approx(1.0));
  CHECK(full_value(lin, Vector{0.0}, Vector{1.0, 0.0}) == doctest::Approx(0.0));

  // chi-square, lambda = 1: F(q2) = q2 - (2 q2 - 1)^2 / 2, maximized at q2 = 3/4 with value 5/8
  const ProblemInstance chi = make_phi_div_dro(phi_spec({0.0, 1.0}, 1.0));
  CHECK(full_value(chi, Vector{0.0}, Vector{0.25, 0.75}) == doctest::Approx(0.625).epsilon(1e-14));
  double best = -1e9, arg = 0;
  for (int k = 0; k <= 1000; ++k) {
    const double q2 = k / 1000.0;
    const double v = full_value(chi, Vector{0.0}, Vector{1 - q2, q2});
    if (v > best) best = v, arg = q2;
  }
  CHECK(arg == doctest::Approx(0.75));

  // heavy penalty pulls q to uniform
  const ProblemInstance heavy = make_phi_div_dro(phi_spec({0.0, 1.0, 0.5}, 1e4));
  best = -1e9;
  Vector qbest;
  for (int i = 0; i <= 60; ++i)
    for (int j = 0; i + j <= 60; ++j) {
      const Vector q{i / 60.0, j / 60.0, (60 - i - j) / 60.0};
      const double v = full_value(heavy, Vector{0.0}, q);
      if (v > best) best = v, qbest = q;
    }
  for (double q : qbest) CHECK(q == doctest::Approx(1.0 / 3.0).epsilon(1e-9));

  CHECK(psi_value(Divergence::chi_square, 1.0) == 0.0);
  CHECK(psi_value(Divergence::kl, 1.0) == 0.0);
  CHECK(psi_derivative(Divergence::kl, 1.0) == 0.0);
}

TEST_CASE("phi-divergence composite matches a direct evaluation") {
  for (Divergence psi : {Divergence::chi_square, Divergence::kl}) {
    PhiDivDroSpec s;
    s.features = Eigen::MatrixXd(3, 2);
    s.features << 1, 0.5, -0.3, 2, 0.7, -1;
    s.targets = Eigen::Vector3d(0.2, -1.0, 0.4);
    s.lambda_pen = 0.3;
    s.psi = psi;
    s.loss = Loss::absolute;
    const MoreauComposite c = make_phi_div_dro_composite(s);
    const Vector theta{0.4, -0.2}, q{0.2, 0.5, 0.3};
    double direct = 0.0;
    for (int i = 0; i < 3; ++i) {
      const double res = s.features(i, 0) * theta[0] + s.features(i, 1) * theta[1] - s.targets[i];
      direct += 3 * q[static_cast<std::size_t>(i)] * std::abs(res) - s.lambda_pen * psi_value(psi, 3 * q[static_cast<std::size_t>(i)]);
    }
    direct /= 3.0;
    CHECK(full_nonsmooth_value(c, theta, q) == doctest::Approx(direct).epsilon(1e-12));

    s.loss = Loss::squared;
    const ProblemInstance p = make_phi_div_dro(s);
    double sq = 0.0;
    for (int i = 0; i < 3; ++i) {
      const double res = s.features(i, 0) * theta[0] + s.features(i, 1) * theta[1] - s.targets[i];
      sq += 3 * q[static_cast<std::size_t>(i)] * res * res - s.lambda_pen * psi_value(psi, 3 * q[static_cast<std::size_t>(i)]);
    }
    CHECK(full_value(p, theta, q) == doctest::Approx(sq / 3.0).epsilon(1e-12));
  }
}

TEST_CASE("dataset CSV round trip") {
  SyntheticGroupRegression g;
  g.n = 37;
  g.dim = 3;
  g.seed = 2;
  const Dataset d = make_synthetic_group_regression(g);
  const auto path = std::filesystem::temp_directory_path() / "sgda_dataset_roundtrip.csv";
  write_dataset_csv(path.string(), d);
  const Dataset back = read_dataset_csv(path.string());
  std::filesystem::remove(path);
  CHECK(back.features == d.features);
  CHECK(back.targets == d.targets);
  CHECK(back.group == d.group);
  CHECK_THROWS(read_dataset_csv("/nonexistent/file.csv"));
}

TEST_CASE("synthetic data is seeded") {
  SyntheticGroupRegression g;
  g.seed = 8;
  const Dataset a = make_synthetic_group_regression(g), b = make_synthetic_group_regression(g);
  CHECK(a.features == b.features);
  g.seed = 9;
  CHECK(make_synthetic_group_regression(g).features != a.features);
  std::size_t minority = 0;
  for (int v : a.group) minority += v == 1;
  CHECK(minority == 40);
}

TEST_CASE("quadratic saddle fixtures") {
  QuadraticSaddleSpec s;
  s.A = Eigen::MatrixXd::Identity(2, 2);
  s.B = Eigen::MatrixXd::Zero(2, 2);
  s.C = Eigen::MatrixXd::Identity(2, 2);
  QuadraticSaddle q = make_quadratic_saddle(s);
  CHECK(q.x_star == Vector{0, 0});
  CHECK(q.y_star == Vector{0, 0});

  QuadraticSaddleSpec t;
  t.A = Eigen::MatrixXd::Identity(1, 1);
  t.B = Eigen::MatrixXd::Ones(1, 1);
  t.C = 2.0 * Eigen::MatrixXd::Identity(1, 1);
  t.a = Eigen::VectorXd::Constant(1, 0.3);
  t.b = Eigen::VectorXd::Constant(1, -0.6);
  q = make_quadratic_saddle(t);
  // x + y + 0.3 = 0 and x - 2 y - 0.6 = 0
  CHECK(q.x_star[0] == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(q.y_star[0] == doctest::Approx(-0.3).epsilon(1e-14));
  CHECK(q.saddle_interior);
  const Residuals r = gs_residuals(q.problem, q.x_star, q.y_star);
  CHECK(r.res_x <= 1e-14);
  CHECK(r.res_y <= 1e-14);

  // scaling all matrices scales gradients, not the saddle
  QuadraticSaddleSpec u = t;
  u.A *= 3.0;
  u.B *= 3.0;
  u.C *= 3.0;
  u.a *= 3.0;
  u.b *= 3.0;
  const QuadraticSaddle q3 = make_quadratic_saddle(u);
  CHECK(q3.x_star[0] == doctest::Approx(q.x_star[0]).epsilon(1e-14));
  CHECK(q3.y_star[0] == doctest::Approx(q.y_star[0]).epsilon(1e-14));
  const Vector x{0.4}, y{0.1};
  CHECK(full_grad_x(q3.problem, x, y)[0] == doctest::Approx(3.0 * full_grad_x(q.problem, x, y)[0]));

  QuadraticSaddleSpec singular;
  singular.A = Eigen::MatrixXd::Zero(1, 1);
  singular.B = Eigen::MatrixXd::Zero(1, 1);
  singular.C = Eigen::MatrixXd::Identity(1, 1);
  CHECK_THROWS_AS(make_quadratic_saddle(singular), SingularityError);
}

TEST_CASE("per-sample quadratics average to the target") {
  QuadraticSaddleSpec s;
  s.A = Eigen::MatrixXd::Identity(2, 2);
  s.B = Eigen::MatrixXd::Ones(2, 1);
  s.C = Eigen::MatrixXd::Identity(1, 1);
  s.N = 9;
  s.heterogeneity = 0.5;
  s.offset_noise = 0.5;
  s.seed = 1;
  const QuadraticSaddle q = make_quadratic_saddle(s);
  const Vector x{0.3, -0.8}, y{0.6};
  CHECK(full_value(q.problem, x, y) == doctest::Approx(q.value(x, y)).epsilon(1e-13));
  const Vector g = full_grad_x(q.problem, x, y);
  CHECK(g[0] == doctest::Approx(x[0] + y[0]).epsilon(1e-13));
  CHECK(g[1] == doctest::Approx(x[1] + y[0]).epsilon(1e-13));
}
