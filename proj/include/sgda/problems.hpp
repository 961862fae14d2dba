#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sgda/core.hpp"
#include "sgda/smoothing.hpp"

namespace sgda {

// ---------------------------------------------------------------------------
// Quadratic saddle: F(x, y) = 1/2 x'Ax + x'By - 1/2 y'Cy + a'x + b'y as the
// mean of N per-sample quadratics with zero-mean perturbations.

struct QuadraticSaddleSpec {
  Eigen::MatrixXd A, B, C;
  Eigen::VectorXd a, b;  // empty means zero
  std::size_t N = 1;
  double heterogeneity = 0.0;  // std of per-sample matrix perturbations
  double offset_noise = 0.0;   // std of per-sample linear-term perturbations
  std::uint64_t seed = 0;
  std::optional<ConstraintSet> set_x, set_y;  // default: boxes [-10, 10]
};

class QuadraticSaddle {
public:
  ProblemInstance problem;
  Vector x_star, y_star;
  bool saddle_interior = false;

  // Closed forms for the inner problems, valid while the unconstrained
  // minimizer / maximizer stays inside X / Y (see *_interior).
  Vector x_r(double r, VecView y, VecView z) const;
  double d_r(double r, VecView y, VecView z) const;
  Vector y_max(double r, VecView z) const;
  double p_r(double r, VecView z) const;
  double value(VecView x, VecView y) const;

  Eigen::MatrixXd A, B, C;
  Eigen::VectorXd a, b;
};

QuadraticSaddle make_quadratic_saddle(const QuadraticSaddleSpec& spec);

// ---------------------------------------------------------------------------
// One-dimensional function satisfying the KL property with theta = 1/2 and
// mu = 1/10 on [-2, 2]; maximum 2 at y = 0.

double kl_example_value(double y);
double kl_example_grad(double y);

/// F(x, y) = 1/2 |x|^2 + g(y) over [-1, 1]^{d_x} x [-2, 2].
ProblemInstance make_kl_example(std::size_t dim_x = 1);

// ---------------------------------------------------------------------------
// Data sets and distributionally robust problems.

enum class Loss { squared, absolute, hinge };

struct Dataset {
  Eigen::MatrixXd features;  // n by d
  Eigen::VectorXd targets;   // labels in {-1, 1} for the hinge loss
  std::vector<int> group;    // group id per row, 0-based
};

Dataset read_dataset_csv(const std::string& path);
void write_dataset_csv(const std::string& path, const Dataset& data);

struct SyntheticGroupRegression {
  std::size_t dim = 5;
  std::size_t n = 400;
  double minority_fraction = 0.1;
  double noise = 0.1;        // majority noise std
  double noise_ratio = 10.0;  // minority noise std / majority noise std
  double shift = 1.0;         // norm of the minority coefficient shift
  std::uint64_t seed = 0;
};

/// Two-group linear regression; group 1 is the minority.
Dataset make_synthetic_group_regression(const SyntheticGroupRegression& s);

struct GroupDroSpec {
  std::vector<Eigen::MatrixXd> features;  // one matrix per group
  std::vector<Eigen::VectorXd> targets;
  Loss loss = Loss::squared;
  std::optional<ConstraintSet> set_x;  // default: box [-10, 10]^d
  double delta_tilde = 1.0;
  double mu = 1.0, theta = 1.0;  // the objective is linear in q
};

GroupDroSpec group_spec_from_dataset(const Dataset& data, Loss loss);

/// phi(u, q; xi_i) = N q_{g_i} u / |G_{g_i}| over the simplex of group weights.
MoreauComposite make_group_dro(const GroupDroSpec& spec);
/// The squared-loss Group-DRO objective as a smooth problem (no smoothing bias).
ProblemInstance make_group_dro_problem(const GroupDroSpec& spec);

/// Mean original loss of each group at theta.
Vector group_losses(const GroupDroSpec& spec, VecView theta);
/// Least squares over the pooled data.
Vector erm_least_squares(const GroupDroSpec& spec);

enum class Divergence { chi_square, kl };

double psi_value(Divergence d, double t);
double psi_derivative(Divergence d, double t);

struct PhiDivDroSpec {
  Eigen::MatrixXd features;
  Eigen::VectorXd targets;
  Divergence psi = Divergence::chi_square;
  double lambda_pen = 1.0;
  Loss loss = Loss::squared;
  std::optional<ConstraintSet> set_x;
  double delta_tilde = 1.0;
};

/// (1/N) sum_i [N q_i l_i(theta) - lambda psi(N q_i)] over X x simplex(N);
/// requires the squared loss.
ProblemInstance make_phi_div_dro(const PhiDivDroSpec& spec);
/// Same objective in composite form, for any loss.
MoreauComposite make_phi_div_dro_composite(const PhiDivDroSpec& spec);

}  // namespace sgda
