#include <doctest.h>

#include <cmath>

#include "sgda/projections.hpp"
#include "sgda/rng.hpp"

using namespace sgda;

namespace {

struct Gen {
  std::uint64_t seed, i = 0;
  double normal() {
    const double v = normal_from(counter_hash({seed, 0, 0, 7}, i), counter_hash({seed, 0, 1, 7}, i));
    ++i;
    return v;
  }
  Vector normals(std::size_t n, double scale = 1.0) {
    Vector v(n);
    for (double& e : v) e = scale * normal();
    return v;
  }
};

double norm2(VecView a, VecView b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

std::vector<ConstraintSet> sets(std::size_t n) {
  Vector lo(n), hi(n), c(n);
  for (std::size_t i = 0; i < n; ++i) {
    lo[i] = -1.0 - 0.1 * static_cast<double>(i);
    hi[i] = 0.5 + 0.2 * static_cast<double>(i);
    c[i] = 0.1 * static_cast<double>(i);
  }
  return {ConstraintSet::box(lo, hi), ConstraintSet::ball(c, 0.7), ConstraintSet::simplex(n),
          ConstraintSet::full_space(n)};
}

}  // namespace

TEST_CASE("projection examples") {
  CHECK(project(ConstraintSet::box(2, 0, 1), Vector{1.5, -0.2}) == Vector{1.0, 0.0});
  const Vector b = project(ConstraintSet::ball(Vector{0, 0}, 1.0), Vector{3, 4});
  CHECK(b[0] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(b[1] == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(project(ConstraintSet::simplex(2), Vector{2, 0}) == Vector{1, 0});

  // simplex example against a grid over the segment
  const Vector v{0.3, 0.9};
  double best = 1e9, arg = 0.0;
  for (int k = 0; k <= 100000; ++k) {
    const double t = k / 100000.0;
    const double d = (t - v[0]) * (t - v[0]) + (1 - t - v[1]) * (1 - t - v[1]);
    if (d < best) best = d, arg = t;
  }
  const Vector p = project(ConstraintSet::simplex(2), v);
  CHECK(p[0] == doctest::Approx(arg).epsilon(1e-5));
}

TEST_CASE("normal cone distance examples") {
  const auto box = ConstraintSet::box(1, 0, 1);
  CHECK(normal_cone_dist(box, Vector{0.5}, Vector{0.3}) == doctest::Approx(0.3));
  CHECK(normal_cone_dist(box, Vector{0.0}, Vector{1.0}) == 0.0);
  CHECK(normal_cone_dist(box, Vector{0.0}, Vector{-1.0}) == doctest::Approx(1.0));

  // Simplex at e1: N(x) = {s 1 - w : w >= 0, w_1 = 0}; brute force over s.
  const Vector x{1, 0, 0}, g{0, -1, -2};
  double best = 1e9;
  for (int k = -40000; k <= 40000; ++k) {
    const double s = k * 1e-4;
    double d = (g[0] + s) * (g[0] + s);
    for (int i = 1; i < 3; ++i) d += std::pow(std::min(0.0, g[i] + s), 2);
    best = std::min(best, d);
  }
  CHECK(normal_cone_dist(ConstraintSet::simplex(3), x, g) == doctest::Approx(std::sqrt(best)).epsilon(1e-8));
  CHECK(normal_cone_dist(ConstraintSet::simplex(3), x, g) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("normal cone distance rejects infeasible points") {
  CHECK_THROWS_AS(normal_cone_dist(ConstraintSet::box(1, 0, 1), Vector{1.5}, Vector{0.0}), InfeasibleError);
}

TEST_CASE("projection properties") {
  Gen gen{3};
  for (std::size_t n : {1u, 2u, 5u}) {
    for (const ConstraintSet& s : sets(n)) {
      for (int trial = 0; trial < 2500; ++trial) {
        const Vector u = gen.normals(n, 2.0), v = gen.normals(n, 2.0);
        const Vector pu = s.project(u), pv = s.project(v);
        CHECK(s.contains(pu));
        CHECK(s.project(pu) == pu);
        CHECK(norm2(pu, pv) <= norm2(u, v) * (1 + 1e-12) + 1e-15);
        // variational inequality against another feasible point
        const Vector w = s.project(gen.normals(n, 2.0));
        double vi = 0.0;
        for (std::size_t i = 0; i < n; ++i) vi += (u[i] - pu[i]) * (w[i] - pu[i]);
        CHECK(vi <= 1e-10);
        // the projection is stationary for the linear model pu - u
        Vector gdir(n);
        for (std::size_t i = 0; i < n; ++i) gdir[i] = pu[i] - u[i];
        CHECK(s.normal_cone_dist(pu, gdir) <= 1e-8);
      }
    }
  }
}

TEST_CASE("diameter and default point") {
  CHECK(ConstraintSet::box(2, 0, 1).diameter() == doctest::Approx(std::sqrt(2.0)));
  CHECK(ConstraintSet::ball(Vector{0, 0}, 2).diameter() == 4.0);
  CHECK(ConstraintSet::simplex(3).diameter() == doctest::Approx(std::sqrt(2.0)));
  CHECK(std::isinf(ConstraintSet::full_space(2).diameter()));
  CHECK(ConstraintSet::simplex(4).default_point() == Vector{0.25, 0.25, 0.25, 0.25});
  CHECK(ConstraintSet::box(Vector{0, -2}, Vector{1, 2}).default_point() == Vector{0.5, 0.0});
}
