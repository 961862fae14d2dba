#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>

#include "sgda/core.hpp"
#include "sgda/solver.hpp"

namespace sgda {

struct InnerSolveConfig {
  double tol = 1e-8;  // projected-gradient residual
  std::size_t max_iters = 100000;
  std::optional<double> step;  // default 1 / (r + L_x)
};

class MaxItersError : public Error {
public:
  MaxItersError(const std::string& what, Vector best, double best_residual)
      : Error(what), best_(std::move(best)), residual_(best_residual) {}
  const Vector& best() const { return best_; }
  double best_residual() const { return residual_; }

private:
  Vector best_;
  double residual_;
};

struct Residuals {
  double res_x;
  double res_y;
};

/// dist(0, grad_x F + N_X(x)) and dist(0, -grad_y F + N_Y(y)) with exact gradients.
Residuals gs_residuals(const ProblemInstance& problem, VecView x, VecView y);

struct ResidualEstimate {
  Residuals value;
  Residuals standard_error;
};

/// Residuals from a Monte-Carlo gradient estimate (any regime); the
/// standard error comes from ten batch means.
ResidualEstimate gs_residuals_mc(const ProblemInstance& problem, VecView x, VecView y,
                                 std::size_t batch = 10000, std::uint64_t seed = 0);

struct InnerSolution {
  Vector x;
  double residual;
  std::size_t iterations;
};

/// Projected gradient on F_r(., y, z) = F(., y) + (r/2)|. - z|^2 from
/// proj_X(z) (or `warm`, when given).
InnerSolution solve_x_r(const ProblemInstance& problem, double r, VecView y, VecView z,
                        const InnerSolveConfig& cfg = {}, const Vector* warm = nullptr);

/// r |z - x_r(y, z)|, the norm of grad_z d_r.
double dz_norm(const ProblemInstance& problem, double r, VecView y, VecView z,
               const InnerSolveConfig& cfg = {});

/// F_r(x, y, z).
double regularized_value(const ProblemInstance& problem, double r, VecView x, VecView y, VecView z);

struct LyapunovValue {
  double phi;
  double F_r;
  double d_r;
  double p_r;
  Vector x_r;     // argmin for d_r(y, z)
  Vector y_star;  // maximizer found for d_r(., z)
  bool certified;  // inner max certified by a grid (d_y = 1)
};

struct LyapunovConfig {
  InnerSolveConfig inner;
  std::size_t starts = 8;
  double ascent_tol = 1e-9;
  std::size_t ascent_iters = 20000;
  std::size_t grid_points = 2001;
  std::uint64_t seed = 0;
};

/// Phi_r = (F_r - d_r) + (p_r - d_r) + p_r.
LyapunovValue lyapunov(const ProblemInstance& problem, double r, VecView x, VecView y, VecView z,
                       const LyapunovConfig& cfg = {});

/// Lyapunov evaluation along a trajectory, warm-starting the inner solves.
class LyapunovTracker {
public:
  LyapunovTracker(const ProblemInstance& problem, double r, LyapunovConfig cfg = {});
  LyapunovValue evaluate(VecView x, VecView y, VecView z);

private:
  const ProblemInstance& problem_;
  double r_;
  LyapunovConfig cfg_;
  std::optional<Vector> last_y_star_;
};

/// Max over coordinates of |central difference - grad_i| / max(1, |grad|).
double fd_check(const std::function<double(VecView)>& value_fn, VecView grad, VecView point,
                double h = 1e-5);
double fd_check(const std::function<double(VecView)>& value_fn,
                const std::function<Vector(VecView)>& grad_fn, VecView point, double h = 1e-5);

/// Trace sink filling residuals (and optionally Phi_r) every `stride` rows.
class DiagnosticsSink : public TraceSink {
public:
  DiagnosticsSink(const ProblemInstance& problem, std::size_t stride, std::optional<double> r = {},
                  LyapunovConfig cfg = {});
  void on_row(TraceRow& row, const IterateState& state) override;

private:
  const ProblemInstance& problem_;
  std::size_t stride_;
  std::size_t seen_ = 0;
  std::optional<LyapunovTracker> tracker_;
};

}  // namespace sgda
