#include "sgda/projections.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace sgda {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kEps = std::numeric_limits<double>::epsilon();

bool simplex_member(VecView v, double tol) {
  double s = 0.0;
  for (double e : v) {
    if (e < -tol) return false;
    s += e;
  }
  return std::abs(s - 1.0) <= tol;
}

void project_simplex(VecView v, VecMut out) {
  const std::size_t n = v.size();
  // Already on the simplex up to summation rounding: return as is so that
  // projection is exactly idempotent.
  bool nonneg = std::all_of(v.begin(), v.end(), [](double e) { return e >= 0.0; });
  if (nonneg && simplex_member(v, 4.0 * static_cast<double>(n) * kEps)) {
    std::copy(v.begin(), v.end(), out.begin());
    return;
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] > v[b]; });
  double running = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    running += v[order[j]];
    const double t = (running - 1.0) / static_cast<double>(j + 1);
    if (v[order[j]] - t > 0.0) theta = t;
  }
  for (std::size_t i = 0; i < n; ++i) out[i] = std::max(v[i] - theta, 0.0);
}

// Minimize sum_{i free}(g_i+s)^2 + sum_{i active} min(0, g_i+s)^2 over s.
// The active coordinates that end up negative are those with the smallest
// g_i; try each prefix length and keep the consistent one.
double simplex_cone_dist(VecView x, VecView g) {
  const std::size_t n = x.size();
  std::vector<std::size_t> active;
  double free_sum = 0.0;
  std::size_t free_count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (x[i] <= kSetTolerance) {
      active.push_back(i);
    } else {
      free_sum += g[i];
      ++free_count;
    }
  }
  std::stable_sort(active.begin(), active.end(),
                   [&](std::size_t a, std::size_t b) { return g[a] < g[b]; });
  auto objective = [&](double s) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double t = g[i] + s;
      if (x[i] <= kSetTolerance) t = std::min(t, 0.0);
      acc += t * t;
    }
    return acc;
  };
  double best = std::numeric_limits<double>::infinity();
  double sum = free_sum;
  for (std::size_t k = 0; k <= active.size(); ++k) {
    if (k > 0) sum += g[active[k - 1]];
    const std::size_t count = free_count + k;
    if (count == 0) continue;
    const double s = -sum / static_cast<double>(count);
    best = std::min(best, objective(s));
  }
  if (free_count == 0) best = std::min(best, objective(-g[active.back()]));
  return std::sqrt(best);
}

}  // namespace

ConstraintSet ConstraintSet::box(Vector lo, Vector hi) {
  if (lo.empty()) throw DimError("box: dimension must be positive");
  check_dim(hi.size(), lo.size(), "box bounds");
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (!(lo[i] <= hi[i]) || !std::isfinite(lo[i]) || !std::isfinite(hi[i]))
      throw ConfigError("box: require finite lo <= hi in every coordinate");
  }
  return ConstraintSet(Box{std::move(lo), std::move(hi)});
}

ConstraintSet ConstraintSet::box(std::size_t dim, double lo, double hi) {
  return box(Vector(dim, lo), Vector(dim, hi));
}

ConstraintSet ConstraintSet::ball(Vector center, double radius) {
  if (center.empty()) throw DimError("ball: dimension must be positive");
  if (!(radius > 0.0) || !std::isfinite(radius)) throw ConfigError("ball: radius must be positive");
  if (!all_finite(center)) throw ConfigError("ball: center must be finite");
  return ConstraintSet(Ball{std::move(center), radius});
}

ConstraintSet ConstraintSet::simplex(std::size_t dim) {
  if (dim == 0) throw DimError("simplex: dimension must be positive");
  return ConstraintSet(Simplex{dim});
}

ConstraintSet ConstraintSet::full_space(std::size_t dim) {
  if (dim == 0) throw DimError("full space: dimension must be positive");
  return ConstraintSet(FullSpace{dim});
}

std::size_t ConstraintSet::dim() const {
  return std::visit(overloaded{[](const Box& b) { return b.lo.size(); },
                               [](const Ball& b) { return b.center.size(); },
                               [](const Simplex& s) { return s.dim; },
                               [](const FullSpace& f) { return f.dim; }},
                    kind_);
}

double ConstraintSet::diameter() const {
  return std::visit(
      overloaded{[](const Box& b) { return std::sqrt(sq_distance(b.hi, b.lo)); },
                 [](const Ball& b) { return 2.0 * b.radius; },
                 [](const Simplex& s) { return s.dim == 1 ? 0.0 : std::sqrt(2.0); },
                 [](const FullSpace&) { return std::numeric_limits<double>::infinity(); }},
      kind_);
}

bool ConstraintSet::contains(VecView x, double tol) const {
  if (x.size() != dim()) return false;
  if (!all_finite(x)) return false;
  return std::visit(overloaded{[&](const Box& b) {
                                 for (std::size_t i = 0; i < x.size(); ++i)
                                   if (x[i] < b.lo[i] - tol || x[i] > b.hi[i] + tol) return false;
                                 return true;
                               },
                               [&](const Ball& b) {
                                 return std::sqrt(sq_distance(x, b.center)) <= b.radius + tol;
                               },
                               [&](const Simplex&) { return simplex_member(x, tol); },
                               [](const FullSpace&) { return true; }},
                    kind_);
}

Vector ConstraintSet::project(VecView v) const {
  Vector out(v.size());
  project_into(v, out);
  return out;
}

void ConstraintSet::project_into(VecView v, VecMut out) const {
  check_dim(v.size(), dim(), "project");
  check_dim(out.size(), dim(), "project output");
  std::visit(overloaded{[&](const Box& b) {
                          kernels::active().clamp(v.data(), b.lo.data(), b.hi.data(), out.data(),
                                                  v.size());
                        },
                        [&](const Ball& b) {
                          const double d = std::sqrt(sq_distance(v, b.center));
                          if (d <= b.radius * (1.0 + 4.0 * kEps)) {
                            std::copy(v.begin(), v.end(), out.begin());
                            return;
                          }
                          const double s = b.radius / d;
                          for (std::size_t i = 0; i < v.size(); ++i)
                            out[i] = b.center[i] + s * (v[i] - b.center[i]);
                        },
                        [&](const Simplex&) { project_simplex(v, out); },
                        [&](const FullSpace&) { std::copy(v.begin(), v.end(), out.begin()); }},
             kind_);
}

double ConstraintSet::normal_cone_dist(VecView x, VecView g) const {
  check_dim(x.size(), dim(), "normal_cone_dist point");
  check_dim(g.size(), dim(), "normal_cone_dist gradient");
  if (!contains(x, kSetTolerance)) throw InfeasibleError("normal_cone_dist: point not in set");
  return std::visit(
      overloaded{[&](const Box& b) {
                   double acc = 0.0;
                   for (std::size_t i = 0; i < x.size(); ++i) {
                     const bool at_lo = x[i] <= b.lo[i] + kSetTolerance;
                     const bool at_hi = x[i] >= b.hi[i] - kSetTolerance;
                     double t = g[i];
                     if (at_lo && at_hi) t = 0.0;
                     else if (at_lo) t = std::min(g[i], 0.0);
                     else if (at_hi) t = std::max(g[i], 0.0);
                     acc += t * t;
                   }
                   return std::sqrt(acc);
                 },
                 [&](const Ball& b) {
                   const double gg = sq_norm(g);
                   const double d = std::sqrt(sq_distance(x, b.center));
                   if (d < b.radius - kSetTolerance) return std::sqrt(gg);
                   double s = 0.0;
                   for (std::size_t i = 0; i < x.size(); ++i) s += g[i] * (x[i] - b.center[i]);
                   s /= d;
                   if (s >= 0.0) return std::sqrt(gg);
                   // Tangential part formed explicitly; |g|^2 - s^2 cancels badly.
                   double t2 = 0.0;
                   for (std::size_t i = 0; i < x.size(); ++i) {
                     const double t = g[i] - s * (x[i] - b.center[i]) / d;
                     t2 += t * t;
                   }
                   return std::sqrt(t2);
                 },
                 [&](const Simplex&) { return simplex_cone_dist(x, g); },
                 [&](const FullSpace&) { return norm(g); }},
      kind_);
}

Vector ConstraintSet::default_point() const {
  return std::visit(overloaded{[](const Box& b) {
                                 Vector m(b.lo.size());
                                 for (std::size_t i = 0; i < m.size(); ++i)
                                   m[i] = 0.5 * (b.lo[i] + b.hi[i]);
                                 return m;
                               },
                               [](const Ball& b) { return b.center; },
                               [](const Simplex& s) {
                                 return Vector(s.dim, 1.0 / static_cast<double>(s.dim));
                               },
                               [](const FullSpace& f) { return Vector(f.dim, 0.0); }},
                    kind_);
}

}  // namespace sgda
