#include <algorithm>
#include <cmath>
#include <memory>

#include "common.hpp"
#include "sgda/diagnostics.hpp"
#include "sgda/smoothing.hpp"

namespace sgda::verify {

namespace {

/// c_k(x; i) = (W_i x)_k + v_ik + gamma sin((U_i x)_k) and
/// phi(u, y; i) = sum_j (alpha_ij + beta_ij y_{j mod d_y}) u_j - kappa/2 |y|^2 + e_i.y
/// over y in [0, 1]^{d_y}, with alpha, beta >= 0 so phi is nondecreasing in u.
class RandomComposite final : public CompositeModel {
public:
  RandomComposite(Rng& rng, std::size_t dx, std::size_t dy, std::size_t dc, std::size_t dh,
                  std::size_t n)
      : dx_(dx), dy_(dy), dc_(dc), dh_(dh), n_(n), gamma_(rng.uniform(0.0, 0.5)),
        kappa_(rng.uniform(0.0, 1.0)) {
    const auto ex = static_cast<Eigen::Index>(dx), ec = static_cast<Eigen::Index>(dc);
    for (std::size_t i = 0; i < n; ++i) {
      W_.push_back(rng.normal_matrix(ec, ex, 1.0 / std::sqrt(static_cast<double>(dx))));
      U_.push_back(rng.normal_matrix(ec, ex, 1.0 / std::sqrt(static_cast<double>(dx))));
      v_.push_back(rng.normal_vector(dc));
      alpha_.push_back(rng.uniform_vector(dh, 0.0, 2.0));
      beta_.push_back(rng.uniform_vector(dh, 0.0, 1.0));
      e_.push_back(rng.normal_vector(dy));
    }
  }

  std::size_t dim_x() const override { return dx_; }
  std::size_t dim_y() const override { return dy_; }
  std::size_t dim_c() const override { return dc_; }
  std::size_t dim_h() const override { return dh_; }
  Regime regime() const override { return FiniteSum{n_}; }

  void c(VecView x, SampleId id, VecMut out) const override {
    const auto ex = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(dx_));
    const Eigen::VectorXd w = W_[id.value] * ex, u = U_[id.value] * ex;
    for (std::size_t k = 0; k < dc_; ++k) {
      const auto kk = static_cast<Eigen::Index>(k);
      out[k] = w[kk] + v_[id.value][k] + gamma_ * std::sin(u[kk]);
    }
  }
  void jacobian_c(VecView x, SampleId id, VecMut out) const override {
    const auto ex = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(dx_));
    const Eigen::VectorXd u = U_[id.value] * ex;
    for (std::size_t i = 0; i < dx_; ++i)
      for (std::size_t k = 0; k < dc_; ++k) {
        const auto kk = static_cast<Eigen::Index>(k), ii = static_cast<Eigen::Index>(i);
        out[i * dc_ + k] = W_[id.value](kk, ii) + gamma_ * std::cos(u[kk]) * U_[id.value](kk, ii);
      }
  }
  double phi(VecView u, VecView y, SampleId id) const override {
    double s = 0.0;
    for (std::size_t j = 0; j < dh_; ++j) s += weight(j, y, id.value) * u[j];
    for (std::size_t m = 0; m < dy_; ++m) s += -0.5 * kappa_ * y[m] * y[m] + e_[id.value][m] * y[m];
    return s;
  }
  void grad_phi_u(VecView, VecView y, SampleId id, VecMut out) const override {
    for (std::size_t j = 0; j < dh_; ++j) out[j] = weight(j, y, id.value);
  }
  void grad_phi_y(VecView u, VecView y, SampleId id, VecMut out) const override {
    for (std::size_t m = 0; m < dy_; ++m) out[m] = -kappa_ * y[m] + e_[id.value][m];
    for (std::size_t j = 0; j < dh_; ++j) out[j % dy_] += beta_[id.value][j] * u[j];
  }

  /// Lipschitz constant of phi in u over Y: max_i |alpha_i + beta_i|.
  double ell_phi() const {
    double m = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < dh_; ++j) s += (alpha_[i][j] + beta_[i][j]) * (alpha_[i][j] + beta_[i][j]);
      m = std::max(m, std::sqrt(s));
    }
    return m;
  }
  double max_beta() const {
    double m = 0.0;
    for (const Vector& b : beta_)
      for (double v : b) m = std::max(m, v);
    return m;
  }
  double kappa() const { return kappa_; }

private:
  double weight(std::size_t j, VecView y, std::size_t i) const {
    return alpha_[i][j] + beta_[i][j] * y[j % dy_];
  }
  std::size_t dx_, dy_, dc_, dh_, n_;
  double gamma_, kappa_;
  std::vector<Eigen::MatrixXd> W_, U_;
  std::vector<Vector> v_, alpha_, beta_, e_;
};

struct Instance {
  MoreauComposite comp;
  double lambda;
  double ell_h;
};

Instance random_instance(std::uint64_t seed) {
  Rng rng(seed, 7);
  const std::size_t dx = 1 + rng.index(10), dy = 1 + rng.index(3);
  const std::size_t dc = 1 + rng.index(3), dh = 1 + rng.index(3);
  auto model = std::make_shared<RandomComposite>(rng, dx, dy, dc, dh, 4);
  Instance in;
  in.ell_h = 0.0;
  for (std::size_t j = 0; j < dh; ++j) {
    const auto kind = static_cast<ScalarKind>(rng.index(3));
    Vector a = rng.normal_vector(dc);
    const double b = rng.normal();
    const double w = rng.uniform(0.5, 2.0);
    double an = 0.0;
    for (double v : a) an += v * v;
    in.ell_h = std::max(in.ell_h, w * std::sqrt(an));
    in.comp.h.push_back(std::make_shared<AffineComponent>(kind, std::move(a), b, w));
  }
  in.comp.constants.ell_h = in.ell_h;
  in.comp.constants.ell_phi = model->ell_phi();
  // Declared >= ell_phi: it also bounds the curvature of phi.
  in.comp.constants.L_phi = std::max({model->ell_phi(), model->max_beta(), model->kappa()});
  in.comp.constants.ell_c = 1.0;
  in.comp.constants.L_c = 1.0;
  in.comp.constants.d_h = dh;
  in.comp.model = model;
  in.comp.set_x = ConstraintSet::box(dx, -3.0, 3.0);
  in.comp.set_y = ConstraintSet::box(dy, 0.0, 1.0);
  in.comp.validate();
  in.lambda = std::exp(rng.uniform(std::log(1e-2), std::log(1.0)));
  return in;
}

}  // namespace

SuiteResult suite_smoothing_bias() {
  SuiteResult r;
  std::size_t violations = 0, evaluations = 0;
  double worst = 0.0;
  for (std::uint64_t inst = 0; inst < 100; ++inst) {
    const Instance in = random_instance(5000 + inst);
    const MoreauComposite& comp = in.comp;
    const double bound = in.lambda * comp.constants.L_phi * in.ell_h * in.ell_h *
                         std::sqrt(static_cast<double>(comp.constants.d_h)) / 2.0;
    Rng rng(5000 + inst, 8);
    const std::size_t n = std::get<FiniteSum>(comp.model->regime()).n;
    for (int pt = 0; pt < 100; ++pt) {
      const Vector x = rng.uniform_vector(comp.model->dim_x(), -3.0, 3.0);
      const Vector y = rng.uniform_vector(comp.model->dim_y(), 0.0, 1.0);
      double F = 0.0, Fl = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        F += nonsmooth_value(comp, x, y, SampleId{i});
        Fl += smooth_value(comp, in.lambda, x, y, SampleId{i});
      }
      F /= static_cast<double>(n);
      Fl /= static_cast<double>(n);
      const double gap = std::abs(F - Fl);
      ++evaluations;
      if (gap > bound) ++violations;
      worst = std::max(worst, gap / bound);
    }
  }
  r.checks.push_back(check("|F - F^lambda| <= lambda L_phi ell_h^2 sqrt(d_h) / 2", violations == 0,
                           fmt("%zu evaluations, %zu violations, max gap/bound %.3f", evaluations,
                               violations, worst)));
  return r;
}

SuiteResult suite_gradients() {
  SuiteResult r;
  constexpr double h = 1e-6, tol = 1e-5, kink_margin = 1e-4;
  std::size_t checked = 0, skipped = 0, failures = 0;
  double worst_x = 0.0, worst_y = 0.0;
  for (std::uint64_t inst = 0; inst < 100; ++inst) {
    const Instance in = random_instance(9000 + inst);
    const MoreauComposite& comp = in.comp;
    Rng rng(9000 + inst, 9);
    const std::size_t n = std::get<FiniteSum>(comp.model->regime()).n;
    for (int pt = 0; pt < 20; ++pt) {
      const Vector x = rng.uniform_vector(comp.model->dim_x(), -3.0, 3.0);
      const Vector y = rng.uniform_vector(comp.model->dim_y(), 0.0, 1.0);
      const SampleId id{rng.index(n)};
      if (min_kink_distance(comp, in.lambda, x, id) < kink_margin) {
        ++skipped;
        continue;
      }
      const double ex = fd_check([&](VecView v) { return smooth_value(comp, in.lambda, v, y, id); },
                                 smooth_grad_x(comp, in.lambda, x, y, id), x, h);
      const double ey = fd_check([&](VecView v) { return smooth_value(comp, in.lambda, x, v, id); },
                                 smooth_grad_y(comp, in.lambda, x, y, id), y, h);
      ++checked;
      if (!(ex <= tol && ey <= tol)) ++failures;
      worst_x = std::max(worst_x, ex);
      worst_y = std::max(worst_y, ey);
    }
  }
  r.checks.push_back(check("central differences", failures == 0 && checked > 0,
                           fmt("%zu points checked, %zu near kinks skipped, %zu failures, max rel err x %.3g y %.3g",
                               checked, skipped, failures, worst_x, worst_y)));
  return r;
}

}  // namespace sgda::verify
