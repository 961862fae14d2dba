#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "sgda/core.hpp"

namespace sgda {

/// Convex, Lipschitz component h_j : R^{d_c} -> R with a proximal oracle.
class ConvexComponent {
public:
  virtual ~ConvexComponent() = default;
  virtual std::size_t dim() const = 0;
  virtual double value(VecView w) const = 0;
  /// prox_{lambda h}(w); throws ProxFailure if an iterative prox does not converge.
  virtual void prox(double lambda, VecView w, VecMut out) const = 0;
  virtual double lipschitz() const = 0;
  /// Distance from w to the nearest point where the envelope gradient is
  /// not differentiable (the prox switches branch). +inf when there is none.
  virtual double kink_distance(double lambda, VecView w) const;
};

enum class ScalarKind { absolute, hinge, linear };

/// h(w) = weight * base(a.w + b) with base |t|, max(0, t) or t. The prox is
/// the closed form of the scalar base pulled back through the rank-one map.
class AffineComponent final : public ConvexComponent {
public:
  AffineComponent(ScalarKind kind, Vector a, double b = 0.0, double weight = 1.0);

  std::size_t dim() const override { return a_.size(); }
  double value(VecView w) const override;
  void prox(double lambda, VecView w, VecMut out) const override;
  double lipschitz() const override;
  double kink_distance(double lambda, VecView w) const override;

  ScalarKind kind() const { return kind_; }

private:
  double argument(VecView w) const;
  ScalarKind kind_;
  Vector a_;
  double b_, weight_, a_sq_;
};

std::shared_ptr<const ConvexComponent> abs_component(double weight = 1.0);
std::shared_ptr<const ConvexComponent> hinge_component(double weight = 1.0);
std::shared_ptr<const ConvexComponent> linear_component(double slope = 1.0);

struct Envelope {
  double value;
  Vector gradient;
};

/// Moreau envelope h^lambda(w) = h(p) + |w - p|^2 / (2 lambda), p = prox, and
/// its gradient (w - p) / lambda.
Envelope envelope(const ConvexComponent& h, double lambda, VecView w);

struct ScalarEnvelope {
  double value;
  double derivative;
};
ScalarEnvelope envelope(const ConvexComponent& h, double lambda, double w);

/// The smooth pieces of f(x, y; xi) = phi(h(c(x; xi)), y; xi).
class CompositeModel {
public:
  virtual ~CompositeModel() = default;
  virtual std::size_t dim_x() const = 0;
  virtual std::size_t dim_y() const = 0;
  virtual std::size_t dim_c() const = 0;
  virtual std::size_t dim_h() const = 0;
  virtual Regime regime() const = 0;

  virtual void c(VecView x, SampleId id, VecMut out) const = 0;
  /// Row-major d_x by d_c: out[i * d_c + k] = d c_k / d x_i.
  virtual void jacobian_c(VecView x, SampleId id, VecMut out) const = 0;
  virtual double phi(VecView u, VecView y, SampleId id) const = 0;
  virtual void grad_phi_u(VecView u, VecView y, SampleId id, VecMut out) const = 0;
  virtual void grad_phi_y(VecView u, VecView y, SampleId id, VecMut out) const = 0;

  std::vector<SampleId> draw(const BatchKey& key, std::size_t count) const;
};

struct CompositeConstants {
  double ell_c = 0.0, ell_h = 0.0, ell_phi = 0.0;
  double L_c = 0.0, L_phi = 0.0;
  double delta_tilde = 0.0;  // radius for KL transfer to the smoothed problem
  std::size_t d_h = 1;
};

struct MoreauComposite {
  std::shared_ptr<const CompositeModel> model;
  std::vector<std::shared_ptr<const ConvexComponent>> h;
  CompositeConstants constants;
  ConstraintSet set_x;
  ConstraintSet set_y;
  /// sigma, mu, theta carried over to the smoothed problem.
  SmoothnessMeta base_meta;
  std::string name;

  void validate() const;
};

double smooth_value(const MoreauComposite& comp, double lambda, VecView x, VecView y, SampleId id);
Vector smooth_grad_x(const MoreauComposite& comp, double lambda, VecView x, VecView y, SampleId id);
Vector smooth_grad_y(const MoreauComposite& comp, double lambda, VecView x, VecView y, SampleId id);
/// The original (unsmoothed) f.
double nonsmooth_value(const MoreauComposite& comp, VecView x, VecView y, SampleId id);
/// Finite-sum mean of the original f.
double full_nonsmooth_value(const MoreauComposite& comp, VecView x, VecView y);

/// Smallest kink distance of any component at c(x; xi).
double min_kink_distance(const MoreauComposite& comp, double lambda, VecView x, SampleId id);

struct SmoothedConstants {
  double L_x, L_y, rho, ell;
};
SmoothedConstants smoothed_constants(const CompositeConstants& k, double lambda);

/// Bound on |F - F^lambda|: lambda * max(L_phi, ell_phi) * ell_h^2 * sqrt(d_h) / 2.
double smoothing_bias_bound(const CompositeConstants& k, double lambda);

/// Smoothed problem with the smoothed constants in its metadata.
ProblemInstance as_problem(const MoreauComposite& comp, double lambda);

struct StationarityCertificate {
  double delta;
  double residual_x;
  double residual_y;
};

/// Translates the smoothed quantities (|grad_z d_r^lambda| and the smoothed
/// y residual) into a delta-subdifferential residual pair for the original
/// nonsmooth problem.
StationarityCertificate near_stationarity_certificate(const MoreauComposite& comp, double lambda,
                                                      double r, double dz_norm,
                                                      double smoothed_residual_y);

}  // namespace sgda
