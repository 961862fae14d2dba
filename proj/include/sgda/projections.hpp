#pragma once

#include <cstddef>
#include <variant>

#include "sgda/vector.hpp"

namespace sgda {

/// Membership and active-bound tolerance used by normal_cone_dist.
inline constexpr double kSetTolerance = 1e-9;

struct Box {
  Vector lo, hi;
};
struct Ball {
  Vector center;
  double radius;
};
struct Simplex {
  std::size_t dim;
};
struct FullSpace {
  std::size_t dim;
};

/// Closed convex feasible set with an exact Euclidean projection.
class ConstraintSet {
public:
  using Kind = std::variant<Box, Ball, Simplex, FullSpace>;

  /// Zero-dimensional full space; placeholder until assigned.
  ConstraintSet() : kind_(FullSpace{0}) {}

  static ConstraintSet box(Vector lo, Vector hi);
  static ConstraintSet box(std::size_t dim, double lo, double hi);
  static ConstraintSet ball(Vector center, double radius);
  static ConstraintSet simplex(std::size_t dim);
  static ConstraintSet full_space(std::size_t dim);

  const Kind& kind() const { return kind_; }
  std::size_t dim() const;
  double diameter() const;
  bool bounded() const { return !std::holds_alternative<FullSpace>(kind_); }
  bool contains(VecView x, double tol = kSetTolerance) const;

  Vector project(VecView v) const;
  void project_into(VecView v, VecMut out) const;

  /// dist(0, g + N(x)), the normal-cone residual of the linear model g at x.
  double normal_cone_dist(VecView x, VecView g) const;

  /// Box midpoint, ball center, simplex barycenter, origin for the full space.
  Vector default_point() const;

private:
  explicit ConstraintSet(Kind k) : kind_(std::move(k)) {}
  Kind kind_;
};

inline Vector project(const ConstraintSet& set, VecView v) { return set.project(v); }
inline double normal_cone_dist(const ConstraintSet& set, VecView x, VecView g) {
  return set.normal_cone_dist(x, g);
}

}  // namespace sgda
