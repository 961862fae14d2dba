#pragma once

// Small hand-written oracles for unit tests.

#include <functional>
#include <memory>
#include <utility>

#include "sgda/core.hpp"
#include "sgda/smoothing.hpp"

namespace sgda::test {

/// Finite-sum oracle from per-sample lambdas; i is the sample index.
struct FnOracle final : StochasticOracle {
  using ValueFn = std::function<double(VecView, VecView, std::size_t)>;
  using GradFn = std::function<void(VecView, VecView, std::size_t, VecMut)>;

  std::size_t dx, dy, n;
  ValueFn f;
  GradFn gx, gy;
  bool online = false;

  FnOracle(std::size_t dx_, std::size_t dy_, std::size_t n_, ValueFn f_, GradFn gx_, GradFn gy_)
      : dx(dx_), dy(dy_), n(n_), f(std::move(f_)), gx(std::move(gx_)), gy(std::move(gy_)) {}

  std::size_t dim_x() const override { return dx; }
  std::size_t dim_y() const override { return dy; }
  Regime regime() const override {
    if (online) return Online{};
    return FiniteSum{n};
  }
  std::size_t index(SampleId id) const { return online ? id.value : id.value; }
  double value(VecView x, VecView y, SampleId id) const override { return f(x, y, index(id)); }
  void grad_x(VecView x, VecView y, SampleId id, VecMut out) const override { gx(x, y, index(id), out); }
  void grad_y(VecView x, VecView y, SampleId id, VecMut out) const override { gy(x, y, index(id), out); }
};

/// F(x, y) = x y on [-1, 1]^2, one sample.
inline ProblemInstance bilinear_problem() {
  auto o = std::make_shared<FnOracle>(
      1, 1, 1, [](VecView x, VecView y, std::size_t) { return x[0] * y[0]; },
      [](VecView, VecView y, std::size_t, VecMut g) { g[0] = y[0]; },
      [](VecView x, VecView, std::size_t, VecMut g) { g[0] = x[0]; });
  SmoothnessMeta m;
  m.L_x = 1;
  m.L_y = 1;
  return make_problem(o, ConstraintSet::box(1, -1, 1), ConstraintSet::box(1, -1, 1), m, "xy");
}

/// c = x (d_c = d_x), phi(u, y) = sum_j u_j + alpha * y . u, no sample dependence.
struct IdentityComposite : CompositeModel {
  std::size_t d;
  std::size_t dy_;
  double alpha;
  IdentityComposite(std::size_t d_, std::size_t dy, double a) : d(d_), dy_(dy), alpha(a) {}
  std::size_t dim_x() const override { return d; }
  std::size_t dim_y() const override { return dy_; }
  std::size_t dim_c() const override { return d; }
  std::size_t dim_h() const override { return d; }
  Regime regime() const override { return FiniteSum{1}; }
  void c(VecView x, SampleId, VecMut out) const override {
    for (std::size_t i = 0; i < d; ++i) out[i] = x[i];
  }
  void jacobian_c(VecView, SampleId, VecMut out) const override {
    for (std::size_t i = 0; i < d * d; ++i) out[i] = 0.0;
    for (std::size_t i = 0; i < d; ++i) out[i * d + i] = 1.0;
  }
  double phi(VecView u, VecView y, SampleId) const override {
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) s += u[j] * (1.0 + alpha * (dy_ ? y[j % dy_] : 0.0));
    return s;
  }
  void grad_phi_u(VecView, VecView y, SampleId, VecMut out) const override {
    for (std::size_t j = 0; j < d; ++j) out[j] = 1.0 + alpha * (dy_ ? y[j % dy_] : 0.0);
  }
  void grad_phi_y(VecView u, VecView, SampleId, VecMut out) const override {
    for (std::size_t k = 0; k < dy_; ++k) out[k] = 0.0;
    for (std::size_t j = 0; j < d; ++j)
      if (dy_) out[j % dy_] += alpha * u[j];
  }
};

}  // namespace sgda::test
