#include "sgda/core.hpp"

#include <cmath>

namespace sgda {

std::vector<SampleId> StochasticOracle::draw(const BatchKey& key, std::size_t count) const {
  std::vector<SampleId> ids(count);
  const Regime r = regime();
  if (const auto* fs = std::get_if<FiniteSum>(&r)) {
    for (std::size_t i = 0; i < count; ++i) ids[i] = SampleId{bounded(counter_hash(key, i), fs->n)};
  } else {
    for (std::size_t i = 0; i < count; ++i) ids[i] = SampleId{counter_hash(key, i)};
  }
  return ids;
}

void SmoothnessMeta::validate() const {
  auto nonneg = [](double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw ConfigError(std::string(name) + " must be finite and nonnegative");
  };
  nonneg(L_x, "L_x");
  nonneg(L_y, "L_y");
  nonneg(rho, "rho");
  nonneg(ell, "ell");
  nonneg(sigma_x, "sigma_x");
  nonneg(sigma_y, "sigma_y");
  if (!(mu > 0.0) || !std::isfinite(mu)) throw ConfigError("mu must be positive");
  if (!(theta >= 0.0 && theta <= 1.0)) throw ConfigError("theta must lie in [0, 1]");
  if (!(D_Y > 0.0)) throw ConfigError("D_Y must be positive");
}

void ProblemInstance::validate() const {
  if (!oracle) throw ConfigError("problem has no oracle");
  check_dim(set_x.dim(), oracle->dim_x(), "set_x");
  check_dim(set_y.dim(), oracle->dim_y(), "set_y");
  if (!set_y.bounded()) throw ConfigError("Y must be bounded");
  const Regime r = regime();
  if (const auto* fs = std::get_if<FiniteSum>(&r); fs && fs->n == 0)
    throw ConfigError("finite-sum problem needs at least one sample");
  meta.validate();
}

ProblemInstance make_problem(std::shared_ptr<const StochasticOracle> oracle, ConstraintSet set_x,
                             ConstraintSet set_y, SmoothnessMeta meta, std::string name) {
  ProblemInstance p{std::move(oracle), std::move(set_x), std::move(set_y), meta, std::move(name)};
  p.validate();
  return p;
}

namespace {

std::size_t finite_sum_size(const ProblemInstance& problem, const char* what) {
  const Regime r = problem.regime();
  const auto* fs = std::get_if<FiniteSum>(&r);
  if (!fs) throw RegimeError(std::string(what) + " needs a finite-sum problem");
  return fs->n;
}

}  // namespace

void full_grad(const ProblemInstance& problem, VecView x, VecView y, VecMut gx, VecMut gy) {
  const std::size_t n = finite_sum_size(problem, "full_grad");
  const std::size_t dx = problem.dim_x(), dy = problem.dim_y();
  check_dim(x.size(), dx, "x");
  check_dim(y.size(), dy, "y");
  check_dim(gx.size(), dx, "gx");
  check_dim(gy.size(), dy, "gy");
  const auto& k = kernels::active();
  Vector sx(dx), sy(dy);
  std::fill(gx.begin(), gx.end(), 0.0);
  std::fill(gy.begin(), gy.end(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    problem.oracle->grad(x, y, SampleId{i}, sx, sy);
    k.add(gx.data(), sx.data(), dx);
    k.add(gy.data(), sy.data(), dy);
  }
  k.divide(gx.data(), static_cast<double>(n), dx);
  k.divide(gy.data(), static_cast<double>(n), dy);
}

Vector full_grad_x(const ProblemInstance& problem, VecView x, VecView y) {
  const std::size_t n = finite_sum_size(problem, "full_grad_x");
  const std::size_t dx = problem.dim_x();
  check_dim(x.size(), dx, "x");
  check_dim(y.size(), problem.dim_y(), "y");
  const auto& k = kernels::active();
  Vector acc(dx, 0.0), s(dx);
  for (std::size_t i = 0; i < n; ++i) {
    problem.oracle->grad_x(x, y, SampleId{i}, s);
    k.add(acc.data(), s.data(), dx);
  }
  k.divide(acc.data(), static_cast<double>(n), dx);
  return acc;
}

Vector full_grad_y(const ProblemInstance& problem, VecView x, VecView y) {
  const std::size_t n = finite_sum_size(problem, "full_grad_y");
  const std::size_t dy = problem.dim_y();
  check_dim(x.size(), problem.dim_x(), "x");
  check_dim(y.size(), dy, "y");
  const auto& k = kernels::active();
  Vector acc(dy, 0.0), s(dy);
  for (std::size_t i = 0; i < n; ++i) {
    problem.oracle->grad_y(x, y, SampleId{i}, s);
    k.add(acc.data(), s.data(), dy);
  }
  k.divide(acc.data(), static_cast<double>(n), dy);
  return acc;
}

double full_value(const ProblemInstance& problem, VecView x, VecView y) {
  const std::size_t n = finite_sum_size(problem, "full_value");
  check_dim(x.size(), problem.dim_x(), "x");
  check_dim(y.size(), problem.dim_y(), "y");
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += problem.oracle->value(x, y, SampleId{i});
  return acc / static_cast<double>(n);
}

SigmaEstimate estimate_sigma(const ProblemInstance& problem,
                             const std::vector<std::pair<Vector, Vector>>& points,
                             std::size_t samples, std::uint64_t seed) {
  if (samples < 2) throw ConfigError("estimate_sigma needs at least two samples");
  const std::size_t dx = problem.dim_x(), dy = problem.dim_y();
  SigmaEstimate out{0.0, 0.0};
  std::uint64_t p = 0;
  for (const auto& [x, y] : points) {
    const auto ids = problem.oracle->draw(BatchKey{seed, p++, 0, streams::monte_carlo}, samples);
    std::vector<Vector> gxs(samples, Vector(dx)), gys(samples, Vector(dy));
    Vector mx(dx, 0.0), my(dy, 0.0);
    for (std::size_t i = 0; i < samples; ++i) {
      problem.oracle->grad(x, y, ids[i], gxs[i], gys[i]);
      axpy(1.0, gxs[i], mx);
      axpy(1.0, gys[i], my);
    }
    for (auto& v : mx) v /= static_cast<double>(samples);
    for (auto& v : my) v /= static_cast<double>(samples);
    double vx = 0.0, vy = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
      vx += sq_distance(gxs[i], mx);
      vy += sq_distance(gys[i], my);
    }
    const double denom = static_cast<double>(samples - 1);
    out.sigma_x = std::max(out.sigma_x, std::sqrt(vx / denom));
    out.sigma_y = std::max(out.sigma_y, std::sqrt(vy / denom));
  }
  return out;
}

}  // namespace sgda
