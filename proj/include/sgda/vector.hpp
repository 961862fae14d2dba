#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sgda/errors.hpp"
#include "sgda/kernels.hpp"

namespace sgda {

/// Dense real vector. Entries are expected to be finite; the solver and the
/// oracles check this at their boundaries rather than on every write.
using Vector = std::vector<double>;
using VecView = std::span<const double>;
using VecMut = std::span<double>;

inline void check_dim(std::size_t got, std::size_t want, const char* what) {
  if (got != want)
    throw DimError(std::string(what) + ": dimension " + std::to_string(got) + ", expected " +
                   std::to_string(want));
}

inline bool all_finite(VecView v) {
  for (double e : v)
    if (!std::isfinite(e)) return false;
  return true;
}

inline double dot(VecView a, VecView b) {
  check_dim(b.size(), a.size(), "dot");
  return kernels::active().dot(a.data(), b.data(), a.size());
}

inline double sq_norm(VecView a) { return kernels::active().dot(a.data(), a.data(), a.size()); }

inline double norm(VecView a) { return std::sqrt(sq_norm(a)); }

inline double sq_distance(VecView a, VecView b) {
  check_dim(b.size(), a.size(), "distance");
  return kernels::active().sq_dist(a.data(), b.data(), a.size());
}

inline double distance(VecView a, VecView b) { return std::sqrt(sq_distance(a, b)); }

/// y += alpha * x
inline void axpy(double alpha, VecView x, VecMut y) {
  check_dim(x.size(), y.size(), "axpy");
  kernels::active().axpy(alpha, x.data(), y.data(), x.size());
}

inline Vector subtract(VecView a, VecView b) {
  check_dim(b.size(), a.size(), "subtract");
  Vector out(a.begin(), a.end());
  kernels::active().axpy(-1.0, b.data(), out.data(), out.size());
  return out;
}

}  // namespace sgda
