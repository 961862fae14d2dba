#include <doctest.h>

#include <cstring>

#include "sgda/core.hpp"
#include "sgda/kernels.hpp"
#include "sgda/problems.hpp"
#include "support.hpp"

using namespace sgda;
using sgda::test::FnOracle;

namespace {

ProblemInstance per_sample_grads(std::vector<Vector> gx, std::vector<Vector> gy) {
  const std::size_t n = gx.size(), dx = gx[0].size(), dy = gy[0].size();
  auto o = std::make_shared<FnOracle>(
      dx, dy, n, [](VecView, VecView, std::size_t) { return 0.0; },
      [gx](VecView, VecView, std::size_t i, VecMut g) { std::copy(gx[i].begin(), gx[i].end(), g.begin()); },
      [gy](VecView, VecView, std::size_t i, VecMut g) { std::copy(gy[i].begin(), gy[i].end(), g.begin()); });
  return make_problem(o, ConstraintSet::full_space(dx), ConstraintSet::box(dy, -1, 1), SmoothnessMeta{});
}

}  // namespace

TEST_CASE("full_grad_x averages per-sample gradients") {
  CHECK(full_grad_x(per_sample_grads({{1, 2}}, {{5}}), Vector{0, 0}, Vector{0}) == Vector{1, 2});
  CHECK(full_grad_x(per_sample_grads({{1, 0}, {3, 0}}, {{0}, {0}}), Vector{0, 0}, Vector{0}) ==
        Vector{2, 0});
  // f_i = |x - a_i|^2 / 2 with a = (0), (2) at x = 1
  const Vector a{0.0, 2.0};
  auto o = std::make_shared<FnOracle>(
      1, 1, 2, [a](VecView x, VecView, std::size_t i) { return 0.5 * (x[0] - a[i]) * (x[0] - a[i]); },
      [a](VecView x, VecView, std::size_t i, VecMut g) { g[0] = x[0] - a[i]; },
      [](VecView, VecView, std::size_t, VecMut g) { g[0] = 0.0; });
  auto p = make_problem(o, ConstraintSet::full_space(1), ConstraintSet::box(1, 0, 1), SmoothnessMeta{});
  CHECK(full_grad_x(p, Vector{1.0}, Vector{0.0}) == Vector{0.0});
}

TEST_CASE("full_grad_y averages per-sample gradients") {
  CHECK(full_grad_y(per_sample_grads({{0}}, {{5}}), Vector{0}, Vector{0}) == Vector{5});
  CHECK(full_grad_y(per_sample_grads({{0}, {0}}, {{1}, {-1}}), Vector{0}, Vector{0}) == Vector{0});
  // f_i = c_i x y, c = (1, 3), x = 1
  const Vector c{1.0, 3.0};
  auto o = std::make_shared<FnOracle>(
      1, 1, 2, [c](VecView x, VecView y, std::size_t i) { return c[i] * x[0] * y[0]; },
      [c](VecView, VecView y, std::size_t i, VecMut g) { g[0] = c[i] * y[0]; },
      [c](VecView x, VecView, std::size_t i, VecMut g) { g[0] = c[i] * x[0]; });
  auto p = make_problem(o, ConstraintSet::full_space(1), ConstraintSet::box(1, 0, 1), SmoothnessMeta{});
  CHECK(full_grad_y(p, Vector{1.0}, Vector{0.5}) == Vector{2.0});
}

TEST_CASE("oracle purity and sequential mean") {
  QuadraticSaddleSpec s;
  s.A = Eigen::MatrixXd::Identity(3, 3);
  s.B = Eigen::MatrixXd::Ones(3, 2);
  s.C = 2.0 * Eigen::MatrixXd::Identity(2, 2);
  s.N = 7;
  s.heterogeneity = 0.3;
  s.offset_noise = 0.2;
  s.seed = 11;
  const ProblemInstance p = make_quadratic_saddle(s).problem;
  const Vector x{0.3, -0.7, 1.1}, y{0.2, -0.4};
  Vector g1(3), g2(3);
  p.oracle->grad_x(x, y, SampleId{3}, g1);
  p.oracle->grad_x(x, y, SampleId{3}, g2);
  CHECK(std::memcmp(g1.data(), g2.data(), sizeof(double) * 3) == 0);

  // Ascending-order sequential sum, then divide.
  Vector acc(3, 0.0), g(3);
  for (std::size_t i = 0; i < 7; ++i) {
    p.oracle->grad_x(x, y, SampleId{i}, g);
    for (std::size_t k = 0; k < 3; ++k) acc[k] += g[k];
  }
  for (double& v : acc) v /= 7.0;
  const Vector full = full_grad_x(p, x, y);
  CHECK(std::memcmp(acc.data(), full.data(), sizeof(double) * 3) == 0);
  CHECK(full_grad_y(p, x, y).size() == 2);
}

TEST_CASE("draws are reproducible and in range") {
  const ProblemInstance p = per_sample_grads({{0}, {0}, {0}}, {{0}, {0}, {0}});
  const BatchKey key{5, 2, 3, streams::estimator};
  const auto a = p.oracle->draw(key, 100);
  const auto b = p.oracle->draw(key, 100);
  CHECK(a == b);
  for (SampleId id : a) CHECK(id.value < 3);
  const auto c = p.oracle->draw(BatchKey{5, 2, 4, streams::estimator}, 100);
  CHECK(a != c);
}

TEST_CASE("dimension mismatches are rejected") {
  const ProblemInstance p = per_sample_grads({{1, 2}}, {{5}});
  CHECK_THROWS_AS(full_grad_x(p, Vector{0}, Vector{0}), DimError);
  CHECK_THROWS_AS(make_problem(p.oracle, ConstraintSet::full_space(3), ConstraintSet::box(1, 0, 1),
                               SmoothnessMeta{}),
                  DimError);
  CHECK_THROWS(make_problem(p.oracle, ConstraintSet::full_space(2), ConstraintSet::full_space(1),
                            SmoothnessMeta{}));
}

TEST_CASE("metadata validation") {
  SmoothnessMeta m;
  m.L_x = -1.0;
  CHECK_THROWS_AS(m.validate(), ConfigError);
  m = SmoothnessMeta{};
  m.theta = 1.5;
  CHECK_THROWS_AS(m.validate(), ConfigError);
}

TEST_CASE("kernel variants agree") {
  using namespace sgda::kernels;
  const KernelTable& ref = scalar_table();
  std::vector<Isa> isas;
  for (Isa i : {Isa::avx2, Isa::neon})
    if (isa_available(i)) isas.push_back(i);
  MESSAGE("vector variants available: " << isas.size());
  for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 16u, 33u, 1001u}) {
    Vector a(n), b(n), c(n), lo(n), hi(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = normal_from(counter_hash({1, 0, n, 0}, i), counter_hash({2, 0, n, 0}, i));
      b[i] = normal_from(counter_hash({3, 0, n, 0}, i), counter_hash({4, 0, n, 0}, i));
      c[i] = normal_from(counter_hash({5, 0, n, 0}, i), counter_hash({6, 0, n, 0}, i));
      lo[i] = -0.5;
      hi[i] = 0.5 + 0.1 * static_cast<double>(i % 3);
    }
    for (Isa isa : isas) {
      const KernelTable& t = table(isa);
      auto same = [&](auto fn_ref, auto fn_t) {
        Vector u = a, v = a;
        fn_ref(u);
        fn_t(v);
        CHECK(std::memcmp(u.data(), v.data(), n * sizeof(double)) == 0);
      };
      same([&](Vector& u) { ref.add(u.data(), b.data(), n); }, [&](Vector& u) { t.add(u.data(), b.data(), n); });
      same([&](Vector& u) { ref.add_diff(u.data(), b.data(), c.data(), n); },
           [&](Vector& u) { t.add_diff(u.data(), b.data(), c.data(), n); });
      same([&](Vector& u) { ref.axpy(0.37, b.data(), u.data(), n); },
           [&](Vector& u) { t.axpy(0.37, b.data(), u.data(), n); });
      same([&](Vector& u) { ref.scale(u.data(), -1.3, n); }, [&](Vector& u) { t.scale(u.data(), -1.3, n); });
      same([&](Vector& u) { ref.divide(u.data(), 7.0, n); }, [&](Vector& u) { t.divide(u.data(), 7.0, n); });
      same([&](Vector& u) { ref.relax(u.data(), b.data(), 0.25, n); },
           [&](Vector& u) { t.relax(u.data(), b.data(), 0.25, n); });
      same([&](Vector& u) { ref.primal_step(a.data(), b.data(), c.data(), 0.1, 2.0, u.data(), n); },
           [&](Vector& u) { t.primal_step(a.data(), b.data(), c.data(), 0.1, 2.0, u.data(), n); });
      same([&](Vector& u) { ref.clamp(a.data(), lo.data(), hi.data(), u.data(), n); },
           [&](Vector& u) { t.clamp(a.data(), lo.data(), hi.data(), u.data(), n); });
      const double d0 = ref.dot(a.data(), b.data(), n), d1 = t.dot(a.data(), b.data(), n);
      CHECK(std::abs(d0 - d1) <= 1e-13 * (1.0 + std::abs(d0)) * static_cast<double>(n + 1));
      const double s0 = ref.sq_dist(a.data(), b.data(), n), s1 = t.sq_dist(a.data(), b.data(), n);
      CHECK(std::abs(s0 - s1) <= 1e-13 * (1.0 + s0));
      CHECK(t.dot(a.data(), b.data(), n) == t.dot(a.data(), b.data(), n));
    }
  }
}
