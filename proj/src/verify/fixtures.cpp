#include "common.hpp"

namespace sgda::verify {

QuadraticSaddle saddle_fixture(std::size_t N, std::uint64_t seed) {
  QuadraticSaddleSpec s;
  s.A = Eigen::Matrix2d{{1.0, 0.0}, {0.0, -0.2}};
  s.B = Eigen::Matrix2d{{1.0, 0.0}, {0.0, 1.0}};
  s.C = Eigen::Matrix2d{{1.0, 0.0}, {0.0, 1.0}};
  s.a = Eigen::Vector2d{0.3, -0.2};
  s.b = Eigen::Vector2d{0.1, 0.25};
  s.N = N;
  s.heterogeneity = 0.05;
  s.offset_noise = 0.1;
  s.seed = seed;
  s.set_x = ConstraintSet::box(2, -1.0, 1.0);
  s.set_y = ConstraintSet::box(2, -1.0, 1.0);
  return make_quadratic_saddle(s);
}

QuadraticSaddle random_quadratic(std::size_t dx, std::size_t dy, std::size_t N, double heterogeneity,
                                 double offset_noise, std::uint64_t seed, double box) {
  Rng rng(seed, 100);
  const auto ex = static_cast<Eigen::Index>(dx), ey = static_cast<Eigen::Index>(dy);
  QuadraticSaddleSpec s;
  const Eigen::MatrixXd G = rng.normal_matrix(ex, ex, 1.0 / std::sqrt(static_cast<double>(dx)));
  s.A = 0.5 * (G + G.transpose());
  s.B = rng.normal_matrix(ex, ey, 1.0 / std::sqrt(static_cast<double>(dx)));
  const Eigen::MatrixXd H = rng.normal_matrix(ey, ey, 1.0 / std::sqrt(static_cast<double>(dy)));
  s.C = H.transpose() * H + Eigen::MatrixXd::Identity(ey, ey);
  s.a = rng.normal_matrix(ex, 1, 0.5);
  s.b = rng.normal_matrix(ey, 1, 0.5);
  s.N = N;
  s.heterogeneity = heterogeneity;
  s.offset_noise = offset_noise;
  s.seed = seed;
  s.set_x = ConstraintSet::box(dx, -box, box);
  s.set_y = ConstraintSet::box(dy, -box, box);
  return make_quadratic_saddle(s);
}

}  // namespace sgda::verify
