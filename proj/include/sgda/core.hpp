#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "sgda/projections.hpp"
#include "sgda/rng.hpp"
#include "sgda/vector.hpp"

namespace sgda {

/// Index into the data set (finite-sum) or a hashed draw token (online).
struct SampleId {
  std::uint64_t value = 0;
  friend bool operator==(SampleId, SampleId) = default;
};

struct FiniteSum {
  std::size_t n;
};
struct Online {};
using Regime = std::variant<FiniteSum, Online>;

inline bool is_finite_sum(const Regime& r) { return std::holds_alternative<FiniteSum>(r); }

/// Per-sample oracle for f(x, y; xi). Implementations must be pure: equal
/// inputs give bit-identical outputs and no call mutates shared state.
class StochasticOracle {
public:
  virtual ~StochasticOracle() = default;

  virtual std::size_t dim_x() const = 0;
  virtual std::size_t dim_y() const = 0;
  virtual Regime regime() const = 0;

  virtual double value(VecView x, VecView y, SampleId id) const = 0;
  virtual void grad_x(VecView x, VecView y, SampleId id, VecMut out) const = 0;
  virtual void grad_y(VecView x, VecView y, SampleId id, VecMut out) const = 0;

  /// Both partial gradients; override when they share work.
  virtual void grad(VecView x, VecView y, SampleId id, VecMut gx, VecMut gy) const {
    grad_x(x, y, id, gx);
    grad_y(x, y, id, gy);
  }

  /// `count` i.i.d. draws for the batch identified by `key`. Finite-sum ids are
  /// uniform over [0, N) with replacement; online ids are raw hash tokens.
  std::vector<SampleId> draw(const BatchKey& key, std::size_t count) const;
};

/// Problem constants supplied by the user.
struct SmoothnessMeta {
  double L_x = 0.0;
  double L_y = 0.0;
  double rho = 0.0;  // weak-convexity modulus of F(., y)
  double ell = 0.0;  // Lipschitz constant of f
  double sigma_x = 0.0;
  double sigma_y = 0.0;
  double mu = 1.0;
  double theta = 1.0;
  double D_Y = 1.0;
  bool sigma_estimated = false;  // sigma_* came from pilot sampling

  void validate() const;
};

struct ProblemInstance {
  std::shared_ptr<const StochasticOracle> oracle;
  ConstraintSet set_x;
  ConstraintSet set_y;
  SmoothnessMeta meta;
  std::string name;

  std::size_t dim_x() const { return oracle->dim_x(); }
  std::size_t dim_y() const { return oracle->dim_y(); }
  Regime regime() const { return oracle->regime(); }

  /// Checks set/oracle dimensions and boundedness of Y.
  void validate() const;
};

ProblemInstance make_problem(std::shared_ptr<const StochasticOracle> oracle, ConstraintSet set_x,
                             ConstraintSet set_y, SmoothnessMeta meta, std::string name = {});

/// Exact mean gradients of a finite-sum problem, summed in ascending sample order.
Vector full_grad_x(const ProblemInstance& problem, VecView x, VecView y);
Vector full_grad_y(const ProblemInstance& problem, VecView x, VecView y);
void full_grad(const ProblemInstance& problem, VecView x, VecView y, VecMut gx, VecMut gy);
double full_value(const ProblemInstance& problem, VecView x, VecView y);

/// Pilot Monte-Carlo estimate of sigma_x, sigma_y: the largest empirical
/// per-sample gradient standard deviation over the given points.
struct SigmaEstimate {
  double sigma_x;
  double sigma_y;
};
SigmaEstimate estimate_sigma(const ProblemInstance& problem,
                             const std::vector<std::pair<Vector, Vector>>& points,
                             std::size_t samples, std::uint64_t seed);

}  // namespace sgda
