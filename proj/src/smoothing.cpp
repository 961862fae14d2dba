#include "sgda/smoothing.hpp"

#include <cmath>
#include <limits>

namespace sgda {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double ConvexComponent::kink_distance(double, VecView) const { return kInf; }

AffineComponent::AffineComponent(ScalarKind kind, Vector a, double b, double weight)
    : kind_(kind), a_(std::move(a)), b_(b), weight_(weight) {
  if (a_.empty()) throw DimError("component: empty coefficient vector");
  if (!all_finite(a_) || !std::isfinite(b_) || !std::isfinite(weight_))
    throw ConfigError("component: coefficients must be finite");
  if (kind_ != ScalarKind::linear && weight_ < 0.0)
    throw ConfigError("component: a negative weight makes the component nonconvex");
  a_sq_ = 0.0;
  for (double e : a_) a_sq_ += e * e;
}

double AffineComponent::argument(VecView w) const {
  check_dim(w.size(), a_.size(), "component argument");
  double t = b_;
  for (std::size_t i = 0; i < a_.size(); ++i) t += a_[i] * w[i];
  return t;
}

double AffineComponent::value(VecView w) const {
  const double t = argument(w);
  switch (kind_) {
    case ScalarKind::absolute: return weight_ * std::abs(t);
    case ScalarKind::hinge: return weight_ * std::max(t, 0.0);
    case ScalarKind::linear: return weight_ * t;
  }
  return 0.0;
}

void AffineComponent::prox(double lambda, VecView w, VecMut out) const {
  if (!(lambda > 0.0)) throw ConfigError("prox: lambda must be positive");
  check_dim(out.size(), a_.size(), "prox output");
  const double t = argument(w);
  std::copy(w.begin(), w.end(), out.begin());
  if (a_sq_ == 0.0) return;
  double p = t;
  switch (kind_) {
    case ScalarKind::absolute: {
      const double kappa = lambda * weight_ * a_sq_;
      p = std::abs(t) > kappa ? (t > 0 ? t - kappa : t + kappa) : 0.0;
      break;
    }
    case ScalarKind::hinge: {
      const double kappa = lambda * weight_ * a_sq_;
      p = t > kappa ? t - kappa : (t < 0.0 ? t : 0.0);
      break;
    }
    case ScalarKind::linear: p = t - lambda * weight_ * a_sq_; break;
  }
  const double s = (p - t) / a_sq_;
  for (std::size_t i = 0; i < a_.size(); ++i) out[i] += s * a_[i];
}

double AffineComponent::lipschitz() const { return std::abs(weight_) * std::sqrt(a_sq_); }

double AffineComponent::kink_distance(double lambda, VecView w) const {
  if (a_sq_ == 0.0 || kind_ == ScalarKind::linear) return kInf;
  const double t = argument(w);
  const double kappa = lambda * weight_ * a_sq_;
  const double na = std::sqrt(a_sq_);
  if (kind_ == ScalarKind::absolute) return std::min(std::abs(t - kappa), std::abs(t + kappa)) / na;
  return std::min(std::abs(t), std::abs(t - kappa)) / na;
}

std::shared_ptr<const ConvexComponent> abs_component(double weight) {
  return std::make_shared<AffineComponent>(ScalarKind::absolute, Vector{1.0}, 0.0, weight);
}
std::shared_ptr<const ConvexComponent> hinge_component(double weight) {
  return std::make_shared<AffineComponent>(ScalarKind::hinge, Vector{1.0}, 0.0, weight);
}
std::shared_ptr<const ConvexComponent> linear_component(double slope) {
  return std::make_shared<AffineComponent>(ScalarKind::linear, Vector{1.0}, 0.0, slope);
}

Envelope envelope(const ConvexComponent& h, double lambda, VecView w) {
  if (!(lambda > 0.0)) throw ConfigError("envelope: lambda must be positive");
  check_dim(w.size(), h.dim(), "envelope argument");
  Vector p(w.size());
  h.prox(lambda, w, p);
  if (!all_finite(p)) throw ProxFailure("prox returned a non-finite point");
  Envelope e{h.value(p), Vector(w.size())};
  double sq = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double d = w[i] - p[i];
    sq += d * d;
    e.gradient[i] = d / lambda;
  }
  e.value += sq / (2.0 * lambda);
  return e;
}

ScalarEnvelope envelope(const ConvexComponent& h, double lambda, double w) {
  const double arg[1] = {w};
  Envelope e = envelope(h, lambda, VecView(arg, 1));
  return {e.value, e.gradient[0]};
}

std::vector<SampleId> CompositeModel::draw(const BatchKey& key, std::size_t count) const {
  std::vector<SampleId> ids(count);
  const Regime r = regime();
  if (const auto* fs = std::get_if<FiniteSum>(&r)) {
    for (std::size_t i = 0; i < count; ++i) ids[i] = SampleId{bounded(counter_hash(key, i), fs->n)};
  } else {
    for (std::size_t i = 0; i < count; ++i) ids[i] = SampleId{counter_hash(key, i)};
  }
  return ids;
}

void MoreauComposite::validate() const {
  if (!model) throw ConfigError("composite has no model");
  check_dim(h.size(), model->dim_h(), "composite components");
  check_dim(constants.d_h, model->dim_h(), "composite d_h");
  for (const auto& hj : h) {
    if (!hj) throw ConfigError("composite: null component");
    check_dim(hj->dim(), model->dim_c(), "component dimension");
  }
  check_dim(set_x.dim(), model->dim_x(), "composite set_x");
  check_dim(set_y.dim(), model->dim_y(), "composite set_y");
  if (!set_y.bounded()) throw ConfigError("Y must be bounded");
}

namespace {

struct Evaluation {
  Vector u;       // h^lambda(c(x))
  Vector v;       // sum_j dphi/du_j * grad h_j^lambda
  Vector grad_x;  // J v
  Vector grad_y;
  double value = 0.0;
};

enum Want : unsigned { kValue = 1, kGradX = 2, kGradY = 4 };

Evaluation evaluate(const MoreauComposite& comp, double lambda, VecView x, VecView y, SampleId id,
                    unsigned want) {
  if (!(lambda > 0.0)) throw ConfigError("smoothing: lambda must be positive");
  const CompositeModel& m = *comp.model;
  const std::size_t dx = m.dim_x(), dc = m.dim_c(), dh = m.dim_h();
  check_dim(x.size(), dx, "composite x");
  check_dim(y.size(), m.dim_y(), "composite y");
  Vector cv(dc);
  m.c(x, id, cv);
  Evaluation ev;
  ev.u.resize(dh);
  std::vector<Vector> dh_grads(dh);
  for (std::size_t j = 0; j < dh; ++j) {
    Envelope e = envelope(*comp.h[j], lambda, cv);
    ev.u[j] = e.value;
    dh_grads[j] = std::move(e.gradient);
  }
  if (want & kValue) ev.value = m.phi(ev.u, y, id);
  if (want & kGradX) {
    Vector pu(dh);
    m.grad_phi_u(ev.u, y, id, pu);
    ev.v.assign(dc, 0.0);
    for (std::size_t j = 0; j < dh; ++j)
      for (std::size_t k = 0; k < dc; ++k) ev.v[k] += pu[j] * dh_grads[j][k];
    Vector jac(dx * dc);
    m.jacobian_c(x, id, jac);
    ev.grad_x.assign(dx, 0.0);
    for (std::size_t i = 0; i < dx; ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k < dc; ++k) s += jac[i * dc + k] * ev.v[k];
      ev.grad_x[i] = s;
    }
  }
  if (want & kGradY) {
    ev.grad_y.resize(m.dim_y());
    m.grad_phi_y(ev.u, y, id, ev.grad_y);
  }
  return ev;
}

class SmoothedOracle final : public StochasticOracle {
public:
  SmoothedOracle(MoreauComposite comp, double lambda) : comp_(std::move(comp)), lambda_(lambda) {}

  std::size_t dim_x() const override { return comp_.model->dim_x(); }
  std::size_t dim_y() const override { return comp_.model->dim_y(); }
  Regime regime() const override { return comp_.model->regime(); }

  double value(VecView x, VecView y, SampleId id) const override {
    return evaluate(comp_, lambda_, x, y, id, kValue).value;
  }
  void grad_x(VecView x, VecView y, SampleId id, VecMut out) const override {
    Evaluation ev = evaluate(comp_, lambda_, x, y, id, kGradX);
    std::copy(ev.grad_x.begin(), ev.grad_x.end(), out.begin());
  }
  void grad_y(VecView x, VecView y, SampleId id, VecMut out) const override {
    Evaluation ev = evaluate(comp_, lambda_, x, y, id, kGradY);
    std::copy(ev.grad_y.begin(), ev.grad_y.end(), out.begin());
  }
  void grad(VecView x, VecView y, SampleId id, VecMut gx, VecMut gy) const override {
    Evaluation ev = evaluate(comp_, lambda_, x, y, id, kGradX | kGradY);
    std::copy(ev.grad_x.begin(), ev.grad_x.end(), gx.begin());
    std::copy(ev.grad_y.begin(), ev.grad_y.end(), gy.begin());
  }

private:
  MoreauComposite comp_;
  double lambda_;
};

}  // namespace

double smooth_value(const MoreauComposite& comp, double lambda, VecView x, VecView y, SampleId id) {
  return evaluate(comp, lambda, x, y, id, kValue).value;
}

Vector smooth_grad_x(const MoreauComposite& comp, double lambda, VecView x, VecView y,
                     SampleId id) {
  return evaluate(comp, lambda, x, y, id, kGradX).grad_x;
}

Vector smooth_grad_y(const MoreauComposite& comp, double lambda, VecView x, VecView y,
                     SampleId id) {
  return evaluate(comp, lambda, x, y, id, kGradY).grad_y;
}

double nonsmooth_value(const MoreauComposite& comp, VecView x, VecView y, SampleId id) {
  const CompositeModel& m = *comp.model;
  check_dim(x.size(), m.dim_x(), "composite x");
  check_dim(y.size(), m.dim_y(), "composite y");
  Vector cv(m.dim_c());
  m.c(x, id, cv);
  Vector u(m.dim_h());
  for (std::size_t j = 0; j < u.size(); ++j) u[j] = comp.h[j]->value(cv);
  return m.phi(u, y, id);
}

double full_nonsmooth_value(const MoreauComposite& comp, VecView x, VecView y) {
  const Regime r = comp.model->regime();
  const auto* fs = std::get_if<FiniteSum>(&r);
  if (!fs) throw RegimeError("full_nonsmooth_value needs a finite-sum composite");
  double acc = 0.0;
  for (std::size_t i = 0; i < fs->n; ++i) acc += nonsmooth_value(comp, x, y, SampleId{i});
  return acc / static_cast<double>(fs->n);
}

double min_kink_distance(const MoreauComposite& comp, double lambda, VecView x, SampleId id) {
  Vector cv(comp.model->dim_c());
  comp.model->c(x, id, cv);
  double best = kInf;
  for (const auto& hj : comp.h) best = std::min(best, hj->kink_distance(lambda, cv));
  return best;
}

SmoothedConstants smoothed_constants(const CompositeConstants& k, double lambda) {
  if (!(lambda > 0.0)) throw ConfigError("smoothed constants: lambda must be positive");
  const double dh = static_cast<double>(k.d_h);
  const double sdh = std::sqrt(dh);
  const double lc2 = k.ell_c * k.ell_c, lc4 = lc2 * lc2;
  const double lh2 = k.ell_h * k.ell_h, lh4 = lh2 * lh2;
  const double lp2 = k.ell_phi * k.ell_phi;
  SmoothedConstants s{};
  s.L_x = std::sqrt(3.0 * lc4 * lp2 * dh / (lambda * lambda) + 3.0 * dh * lh2 * lp2 * k.L_c * k.L_c +
                    3.0 * lc4 * dh * dh * lh4 * k.L_phi * k.L_phi);
  s.L_y = std::max(sdh * k.L_phi * k.ell_h * k.ell_c, k.L_phi);
  s.rho = dh * k.L_phi * lh2 * lc2 + k.L_c * k.ell_phi * k.ell_h * sdh;
  s.ell = std::max(k.ell_phi * k.ell_h * k.ell_c * sdh, k.ell_phi);
  return s;
}

double smoothing_bias_bound(const CompositeConstants& k, double lambda) {
  return lambda * std::max(k.L_phi, k.ell_phi) * k.ell_h * k.ell_h *
         std::sqrt(static_cast<double>(k.d_h)) / 2.0;
}

ProblemInstance as_problem(const MoreauComposite& comp, double lambda) {
  comp.validate();
  const SmoothedConstants s = smoothed_constants(comp.constants, lambda);
  SmoothnessMeta meta = comp.base_meta;
  meta.L_x = s.L_x;
  meta.L_y = s.L_y;
  meta.rho = s.rho;
  meta.ell = s.ell;
  meta.D_Y = comp.set_y.diameter();
  auto oracle = std::make_shared<SmoothedOracle>(comp, lambda);
  return make_problem(std::move(oracle), comp.set_x, comp.set_y, meta,
                      comp.name.empty() ? std::string("smoothed") : comp.name + "-smoothed");
}

StationarityCertificate near_stationarity_certificate(const MoreauComposite& comp, double lambda,
                                                      double r, double dz_norm,
                                                      double smoothed_residual_y) {
  if (!(lambda >= 0.0)) throw ConfigError("certificate: lambda must be nonnegative");
  if (!(r > 0.0)) throw ConfigError("certificate: r must be positive");
  if (!(dz_norm >= 0.0) || !(smoothed_residual_y >= 0.0))
    throw ConfigError("certificate: residuals must be nonnegative");
  const CompositeConstants& k = comp.constants;
  const double sdh = std::sqrt(static_cast<double>(k.d_h));
  const double rho_l = static_cast<double>(k.d_h) * k.L_phi * k.ell_h * k.ell_h * k.ell_c * k.ell_c +
                       k.L_c * k.ell_phi * k.ell_h * sdh;
  const double g = dz_norm;
  double delta = lambda * k.ell_phi * k.ell_h * k.ell_h * sdh;
  if (g > 0.0) {
    const double dX = comp.set_x.diameter();
    if (!std::isfinite(dX)) throw ConfigError("certificate: X must be bounded");
    delta += (rho_l * dX / r) * g + (k.ell_phi * k.ell_h * k.ell_c * sdh / r) * g +
             (rho_l / (2.0 * r * r) + 1.0 / r) * g * g;
  }
  const double lh2 = k.ell_h * k.ell_h;
  const double ry2 = 2.0 * smoothed_residual_y * smoothed_residual_y +
                     lambda * lambda * static_cast<double>(k.d_h) * k.L_phi * k.L_phi * lh2 * lh2 / 2.0;
  return {delta, g, std::sqrt(ry2)};
}

}  // namespace sgda
