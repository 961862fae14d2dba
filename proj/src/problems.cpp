#include "sgda/problems.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "sgda/errors.hpp"
#include "sgda/log.hpp"

namespace sgda {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

Eigen::Map<const VectorXd> as_eigen(VecView v) {
  return Eigen::Map<const VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Vector to_vector(const VectorXd& v) { return Vector(v.data(), v.data() + v.size()); }

void store(const VectorXd& v, VecMut out) {
  std::copy(v.data(), v.data() + v.size(), out.begin());
}

double normal(std::uint64_t seed, std::uint64_t sample, std::uint64_t& counter) {
  const BatchKey key{seed, sample, 0, streams::instance};
  const std::uint64_t a = counter_hash(key, counter++);
  const std::uint64_t b = counter_hash(key, counter++);
  return normal_from(a, b);
}

/// sup of |x| over the set; +inf when unbounded.
double sup_norm(const ConstraintSet& set) {
  return std::visit(
      [](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Box>) {
          double s = 0.0;
          for (std::size_t i = 0; i < k.lo.size(); ++i) {
            const double m = std::max(std::abs(k.lo[i]), std::abs(k.hi[i]));
            s += m * m;
          }
          return std::sqrt(s);
        } else if constexpr (std::is_same_v<K, Ball>) {
          return norm(k.center) + k.radius;
        } else if constexpr (std::is_same_v<K, Simplex>) {
          return 1.0;
        } else {
          return std::numeric_limits<double>::infinity();
        }
      },
      set.kind());
}

double lambda_max_sym(const MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

double lambda_min_sym(const MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double spectral_norm(const MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  return std::sqrt(std::max(0.0, lambda_max_sym(m.transpose() * m)));
}

// ---------------------------------------------------------------------------

struct QuadSample {
  MatrixXd A, B, C;
  VectorXd a, b;
};

class QuadraticOracle final : public StochasticOracle {
public:
  explicit QuadraticOracle(std::vector<QuadSample> samples)
      : s_(std::move(samples)),
        dx_(static_cast<std::size_t>(s_.front().A.rows())),
        dy_(static_cast<std::size_t>(s_.front().C.rows())) {}

  std::size_t dim_x() const override { return dx_; }
  std::size_t dim_y() const override { return dy_; }
  Regime regime() const override { return FiniteSum{s_.size()}; }

  double value(VecView x, VecView y, SampleId id) const override {
    const QuadSample& q = at(id);
    const auto ex = as_eigen(x);
    const auto ey = as_eigen(y);
    return 0.5 * ex.dot(q.A * ex) + ex.dot(q.B * ey) - 0.5 * ey.dot(q.C * ey) + q.a.dot(ex) +
           q.b.dot(ey);
  }
  void grad_x(VecView x, VecView y, SampleId id, VecMut out) const override {
    const QuadSample& q = at(id);
    store(q.A * as_eigen(x) + q.B * as_eigen(y) + q.a, out);
  }
  void grad_y(VecView x, VecView y, SampleId id, VecMut out) const override {
    const QuadSample& q = at(id);
    store(q.B.transpose() * as_eigen(x) - q.C * as_eigen(y) + q.b, out);
  }

private:
  const QuadSample& at(SampleId id) const {
    if (id.value >= s_.size()) throw DimError("quadratic: sample id out of range");
    return s_[id.value];
  }
  std::vector<QuadSample> s_;
  std::size_t dx_, dy_;
};

// ---------------------------------------------------------------------------

class KlExampleOracle final : public StochasticOracle {
public:
  explicit KlExampleOracle(std::size_t dx) : dx_(dx) {}
  std::size_t dim_x() const override { return dx_; }
  std::size_t dim_y() const override { return 1; }
  Regime regime() const override { return FiniteSum{1}; }

  double value(VecView x, VecView y, SampleId) const override {
    return 0.5 * sq_norm(x) + kl_example_value(y[0]);
  }
  void grad_x(VecView x, VecView, SampleId, VecMut out) const override {
    std::copy(x.begin(), x.end(), out.begin());
  }
  void grad_y(VecView, VecView y, SampleId, VecMut out) const override {
    out[0] = kl_example_grad(y[0]);
  }

private:
  std::size_t dx_;
};

// ---------------------------------------------------------------------------
// Per-sample linear-predictor losses shared by the DRO builders.

struct LinearData {
  MatrixXd X;  // n by d
  VectorXd t;
  double x_max = 0.0;  // max row norm
  double t_max = 0.0;
};

LinearData make_linear_data(MatrixXd X, VectorXd t) {
  LinearData d{std::move(X), std::move(t)};
  if (d.X.rows() != d.t.size()) throw DimError("features and targets differ in length");
  for (Eigen::Index i = 0; i < d.X.rows(); ++i) d.x_max = std::max(d.x_max, d.X.row(i).norm());
  d.t_max = d.t.size() ? d.t.cwiseAbs().maxCoeff() : 0.0;
  return d;
}

double prediction(const LinearData& d, std::size_t i, VecView theta) {
  return d.X.row(static_cast<Eigen::Index>(i)).dot(as_eigen(theta));
}

double loss_value(Loss loss, double pred, double target) {
  switch (loss) {
    case Loss::squared: return (pred - target) * (pred - target);
    case Loss::absolute: return std::abs(pred - target);
    case Loss::hinge: return std::max(0.0, 1.0 - target * pred);
  }
  return 0.0;
}

/// Inner map c for each loss: the squared loss keeps h linear, the others
/// put the kink in h.
double c_value(Loss loss, double pred, double target) {
  switch (loss) {
    case Loss::squared: return (pred - target) * (pred - target);
    case Loss::absolute: return pred - target;
    case Loss::hinge: return target * pred;
  }
  return 0.0;
}

double c_slope(Loss loss, double pred, double target) {
  switch (loss) {
    case Loss::squared: return 2.0 * (pred - target);
    case Loss::absolute: return 1.0;
    case Loss::hinge: return target;
  }
  return 0.0;
}

std::shared_ptr<const ConvexComponent> loss_component(Loss loss) {
  switch (loss) {
    case Loss::squared: return linear_component(1.0);
    case Loss::absolute: return abs_component(1.0);
    case Loss::hinge:
      return std::make_shared<AffineComponent>(ScalarKind::hinge, Vector{-1.0}, 1.0);
  }
  return nullptr;
}

struct LossBounds {
  double ell_c, L_c, u_max;
};

LossBounds loss_bounds(Loss loss, const LinearData& d, double radius) {
  const double pred = d.x_max * radius;
  switch (loss) {
    case Loss::squared:
      return {2.0 * (pred + d.t_max) * d.x_max, 2.0 * d.x_max * d.x_max,
              (pred + d.t_max) * (pred + d.t_max)};
    case Loss::absolute: return {d.x_max, 0.0, pred + d.t_max};
    case Loss::hinge: return {d.t_max * d.x_max, 0.0, 1.0 + d.t_max * pred};
  }
  return {0.0, 0.0, 0.0};
}

void check_targets(Loss loss, const LinearData& d) {
  if (loss != Loss::hinge) return;
  for (Eigen::Index i = 0; i < d.t.size(); ++i)
    if (d.t[i] != 1.0 && d.t[i] != -1.0) throw ConfigError("hinge loss needs labels in {-1, 1}");
}

/// Base model over a pooled data set: c, its Jacobian, and the sampling regime.
class LinearCompositeBase : public CompositeModel {
public:
  LinearCompositeBase(LinearData d, Loss loss) : d_(std::move(d)), loss_(loss) {}
  std::size_t dim_x() const override { return static_cast<std::size_t>(d_.X.cols()); }
  std::size_t dim_c() const override { return 1; }
  std::size_t dim_h() const override { return 1; }
  Regime regime() const override { return FiniteSum{static_cast<std::size_t>(d_.X.rows())}; }

  void c(VecView x, SampleId id, VecMut out) const override {
    const std::size_t i = row(id);
    out[0] = c_value(loss_, prediction(d_, i, x), d_.t[static_cast<Eigen::Index>(i)]);
  }
  void jacobian_c(VecView x, SampleId id, VecMut out) const override {
    const std::size_t i = row(id);
    const auto r = static_cast<Eigen::Index>(i);
    const double s = c_slope(loss_, prediction(d_, i, x), d_.t[r]);
    for (Eigen::Index k = 0; k < d_.X.cols(); ++k) out[static_cast<std::size_t>(k)] = s * d_.X(r, k);
  }

protected:
  std::size_t row(SampleId id) const {
    if (id.value >= static_cast<std::uint64_t>(d_.X.rows()))
      throw DimError("sample id out of range");
    return static_cast<std::size_t>(id.value);
  }
  LinearData d_;
  Loss loss_;
};

struct GroupIndex {
  std::vector<std::size_t> group;  // per pooled row
  std::vector<double> size;        // per group
};

class GroupDroModel final : public LinearCompositeBase {
public:
  GroupDroModel(LinearData d, Loss loss, GroupIndex g)
      : LinearCompositeBase(std::move(d), loss), g_(std::move(g)) {}
  std::size_t dim_y() const override { return g_.size.size(); }

  double phi(VecView u, VecView y, SampleId id) const override {
    const std::size_t gi = g_.group[row(id)];
    return weight(gi) * y[gi] * u[0];
  }
  void grad_phi_u(VecView, VecView y, SampleId id, VecMut out) const override {
    const std::size_t gi = g_.group[row(id)];
    out[0] = weight(gi) * y[gi];
  }
  void grad_phi_y(VecView u, VecView, SampleId id, VecMut out) const override {
    const std::size_t gi = g_.group[row(id)];
    std::fill(out.begin(), out.end(), 0.0);
    out[gi] = weight(gi) * u[0];
  }

private:
  double weight(std::size_t gi) const { return static_cast<double>(d_.X.rows()) / g_.size[gi]; }
  GroupIndex g_;
};

class GroupDroOracle final : public StochasticOracle {
public:
  GroupDroOracle(LinearData d, GroupIndex g) : d_(std::move(d)), g_(std::move(g)) {}
  std::size_t dim_x() const override { return static_cast<std::size_t>(d_.X.cols()); }
  std::size_t dim_y() const override { return g_.size.size(); }
  Regime regime() const override { return FiniteSum{static_cast<std::size_t>(d_.X.rows())}; }

  double value(VecView x, VecView y, SampleId id) const override {
    const std::size_t i = row(id), gi = g_.group[i];
    const double res = prediction(d_, i, x) - d_.t[static_cast<Eigen::Index>(i)];
    return weight(gi) * y[gi] * res * res;
  }
  void grad_x(VecView x, VecView y, SampleId id, VecMut out) const override {
    const std::size_t i = row(id), gi = g_.group[i];
    const auto r = static_cast<Eigen::Index>(i);
    const double s = weight(gi) * y[gi] * 2.0 * (prediction(d_, i, x) - d_.t[r]);
    for (Eigen::Index k = 0; k < d_.X.cols(); ++k) out[static_cast<std::size_t>(k)] = s * d_.X(r, k);
  }
  void grad_y(VecView x, VecView, SampleId id, VecMut out) const override {
    const std::size_t i = row(id), gi = g_.group[i];
    const double res = prediction(d_, i, x) - d_.t[static_cast<Eigen::Index>(i)];
    std::fill(out.begin(), out.end(), 0.0);
    out[gi] = weight(gi) * res * res;
  }

private:
  std::size_t row(SampleId id) const {
    if (id.value >= static_cast<std::uint64_t>(d_.X.rows()))
      throw DimError("sample id out of range");
    return static_cast<std::size_t>(id.value);
  }
  double weight(std::size_t gi) const { return static_cast<double>(d_.X.rows()) / g_.size[gi]; }
  LinearData d_;
  GroupIndex g_;
};

struct PooledGroups {
  LinearData data;
  GroupIndex index;
};

PooledGroups pool(const GroupDroSpec& spec) {
  if (spec.features.empty()) throw ConfigError("group DRO needs at least one group");
  if (spec.features.size() != spec.targets.size())
    throw DimError("group DRO: features and targets lists differ in length");
  const Eigen::Index d = spec.features.front().cols();
  Eigen::Index n = 0;
  for (std::size_t g = 0; g < spec.features.size(); ++g) {
    if (spec.features[g].rows() == 0)
      throw EmptyGroupError("group " + std::to_string(g) + " is empty");
    if (spec.features[g].cols() != d) throw DimError("group DRO: feature dimension mismatch");
    if (spec.features[g].rows() != spec.targets[g].size())
      throw DimError("group DRO: features and targets differ in length");
    n += spec.features[g].rows();
  }
  MatrixXd X(n, d);
  VectorXd t(n);
  GroupIndex idx;
  Eigen::Index at = 0;
  for (std::size_t g = 0; g < spec.features.size(); ++g) {
    const Eigen::Index m = spec.features[g].rows();
    X.middleRows(at, m) = spec.features[g];
    t.segment(at, m) = spec.targets[g];
    idx.group.insert(idx.group.end(), static_cast<std::size_t>(m), g);
    idx.size.push_back(static_cast<double>(m));
    at += m;
  }
  return {make_linear_data(std::move(X), std::move(t)), std::move(idx)};
}

ConstraintSet group_set_x(const GroupDroSpec& spec, std::size_t d) {
  ConstraintSet s = spec.set_x ? *spec.set_x : ConstraintSet::box(d, -10.0, 10.0);
  check_dim(s.dim(), d, "group DRO set_x");
  return s;
}

double finite_radius(const ConstraintSet& set, const char* what) {
  const double r = sup_norm(set);
  if (!std::isfinite(r)) throw ConfigError(std::string(what) + " needs a bounded X for its constants");
  return r;
}

// ---------------------------------------------------------------------------

class PhiDivModel final : public LinearCompositeBase {
public:
  PhiDivModel(LinearData d, Loss loss, Divergence psi, double lambda)
      : LinearCompositeBase(std::move(d), loss), psi_(psi), lambda_(lambda) {}
  std::size_t dim_y() const override { return static_cast<std::size_t>(d_.X.rows()); }

  double phi(VecView u, VecView y, SampleId id) const override {
    const std::size_t i = row(id);
    const double n = static_cast<double>(d_.X.rows());
    return n * y[i] * u[0] - lambda_ * psi_value(psi_, n * y[i]);
  }
  void grad_phi_u(VecView, VecView y, SampleId id, VecMut out) const override {
    out[0] = static_cast<double>(d_.X.rows()) * y[row(id)];
  }
  void grad_phi_y(VecView u, VecView y, SampleId id, VecMut out) const override {
    const std::size_t i = row(id);
    const double n = static_cast<double>(d_.X.rows());
    std::fill(out.begin(), out.end(), 0.0);
    out[i] = n * u[0] - lambda_ * n * psi_derivative(psi_, n * y[i]);
  }

private:
  Divergence psi_;
  double lambda_;
};

class PhiDivOracle final : public StochasticOracle {
public:
  PhiDivOracle(LinearData d, Divergence psi, double lambda)
      : d_(std::move(d)), psi_(psi), lambda_(lambda) {}
  std::size_t dim_x() const override { return static_cast<std::size_t>(d_.X.cols()); }
  std::size_t dim_y() const override { return static_cast<std::size_t>(d_.X.rows()); }
  Regime regime() const override { return FiniteSum{static_cast<std::size_t>(d_.X.rows())}; }

  double value(VecView x, VecView y, SampleId id) const override {
    const std::size_t i = row(id);
    const double n = static_cast<double>(d_.X.rows());
    const double res = prediction(d_, i, x) - d_.t[static_cast<Eigen::Index>(i)];
    return n * y[i] * res * res - lambda_ * psi_value(psi_, n * y[i]);
  }
  void grad_x(VecView x, VecView y, SampleId id, VecMut out) const override {
    const std::size_t i = row(id);
    const auto r = static_cast<Eigen::Index>(i);
    const double n = static_cast<double>(d_.X.rows());
    const double s = n * y[i] * 2.0 * (prediction(d_, i, x) - d_.t[r]);
    for (Eigen::Index k = 0; k < d_.X.cols(); ++k) out[static_cast<std::size_t>(k)] = s * d_.X(r, k);
  }
  void grad_y(VecView x, VecView y, SampleId id, VecMut out) const override {
    const std::size_t i = row(id);
    const double n = static_cast<double>(d_.X.rows());
    const double res = prediction(d_, i, x) - d_.t[static_cast<Eigen::Index>(i)];
    std::fill(out.begin(), out.end(), 0.0);
    out[i] = n * res * res - lambda_ * n * psi_derivative(psi_, n * y[i]);
  }

private:
  std::size_t row(SampleId id) const {
    if (id.value >= static_cast<std::uint64_t>(d_.X.rows()))
      throw DimError("sample id out of range");
    return static_cast<std::size_t>(id.value);
  }
  LinearData d_;
  Divergence psi_;
  double lambda_;
};

void check_phi_spec(const PhiDivDroSpec& spec) {
  if (spec.features.rows() == 0) throw ConfigError("phi-divergence DRO needs data");
  if (!(spec.lambda_pen >= 0.0) || !std::isfinite(spec.lambda_pen))
    throw ConfigError("lambda_pen must be finite and nonnegative");
  if (std::abs(psi_value(spec.psi, 1.0)) > 1e-15) throw ConfigError("psi(1) must vanish");
}

/// Bound on psi'' used for the curvature constants. The KL penalty has
/// unbounded curvature at the simplex boundary, so its bound is the local
/// value at the uniform weights.
double psi_curvature_bound(Divergence psi) {
  if (psi == Divergence::kl)
    log_warning("KL penalty: curvature constant taken at the uniform weights (local only)");
  return 1.0;
}

double psi_slope_bound(Divergence psi, double n) {
  return psi == Divergence::chi_square ? std::max(1.0, n - 1.0) : std::log(n) + 1.0;
}

std::string trim(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
  std::size_t b = 0;
  while (b < s.size() && s[b] == ' ') ++b;
  return s.substr(b);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, std::size_t line) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (!s.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last)
    throw ConfigError("dataset line " + std::to_string(line) + ": bad number '" + s + "'");
  return v;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

}  // namespace

// ---------------------------------------------------------------------------

QuadraticSaddle make_quadratic_saddle(const QuadraticSaddleSpec& spec) {
  const Eigen::Index dx = spec.A.rows(), dy = spec.C.rows();
  if (dx == 0 || dy == 0) throw DimError("quadratic: empty dimension");
  if (spec.A.cols() != dx || spec.C.cols() != dy || spec.B.rows() != dx || spec.B.cols() != dy)
    throw DimError("quadratic: inconsistent matrix shapes");
  if (spec.N == 0) throw ConfigError("quadratic: N must be positive");
  const VectorXd a0 = spec.a.size() ? spec.a : VectorXd::Zero(dx);
  const VectorXd b0 = spec.b.size() ? spec.b : VectorXd::Zero(dy);
  if (a0.size() != dx || b0.size() != dy) throw DimError("quadratic: linear term length");
  if (!spec.A.isApprox(spec.A.transpose()) || !spec.C.isApprox(spec.C.transpose()))
    throw ConfigError("quadratic: A and C must be symmetric");
  if (!(lambda_min_sym(spec.C) > 0.0)) throw ConfigError("quadratic: C must be positive definite");

  // Per-sample perturbations, recentred so that they sum to zero.
  const std::size_t N = spec.N;
  std::vector<QuadSample> s(N, QuadSample{spec.A, spec.B, spec.C, a0, b0});
  if (N > 1 && (spec.heterogeneity > 0.0 || spec.offset_noise > 0.0)) {
    std::vector<QuadSample> p(N);
    QuadSample mean{MatrixXd::Zero(dx, dx), MatrixXd::Zero(dx, dy), MatrixXd::Zero(dy, dy),
                    VectorXd::Zero(dx), VectorXd::Zero(dy)};
    for (std::size_t i = 0; i < N; ++i) {
      std::uint64_t c = 0;
      auto draw = [&](double scale) { return scale * normal(spec.seed, i, c); };
      QuadSample& q = p[i];
      q.A = MatrixXd(dx, dx);
      q.C = MatrixXd(dy, dy);
      q.B = MatrixXd(dx, dy);
      for (Eigen::Index r = 0; r < dx; ++r)
        for (Eigen::Index k = r; k < dx; ++k) q.A(r, k) = q.A(k, r) = draw(spec.heterogeneity);
      for (Eigen::Index r = 0; r < dx; ++r)
        for (Eigen::Index k = 0; k < dy; ++k) q.B(r, k) = draw(spec.heterogeneity);
      for (Eigen::Index r = 0; r < dy; ++r)
        for (Eigen::Index k = r; k < dy; ++k) q.C(r, k) = q.C(k, r) = draw(spec.heterogeneity);
      q.a = VectorXd(dx);
      q.b = VectorXd(dy);
      for (Eigen::Index r = 0; r < dx; ++r) q.a[r] = draw(spec.offset_noise);
      for (Eigen::Index r = 0; r < dy; ++r) q.b[r] = draw(spec.offset_noise);
      mean.A += q.A;
      mean.B += q.B;
      mean.C += q.C;
      mean.a += q.a;
      mean.b += q.b;
    }
    const double inv = 1.0 / static_cast<double>(N);
    for (std::size_t i = 0; i < N; ++i) {
      s[i].A += p[i].A - inv * mean.A;
      s[i].B += p[i].B - inv * mean.B;
      s[i].C += p[i].C - inv * mean.C;
      s[i].a += p[i].a - inv * mean.a;
      s[i].b += p[i].b - inv * mean.b;
    }
  }

  QuadraticSaddle out;
  out.A = MatrixXd::Zero(dx, dx);
  out.B = MatrixXd::Zero(dx, dy);
  out.C = MatrixXd::Zero(dy, dy);
  out.a = VectorXd::Zero(dx);
  out.b = VectorXd::Zero(dy);
  MatrixXd AtA = MatrixXd::Zero(dx, dx), BtB = MatrixXd::Zero(dy, dy);
  MatrixXd MtM = MatrixXd::Zero(dx + dy, dx + dy);
  for (const QuadSample& q : s) {
    out.A += q.A;
    out.B += q.B;
    out.C += q.C;
    out.a += q.a;
    out.b += q.b;
    AtA += q.A.transpose() * q.A;
    BtB += q.B.transpose() * q.B;
    MatrixXd Mi(dy, dx + dy);  // d grad_y / d (x, y)
    Mi << q.B.transpose(), -q.C;
    MtM += Mi.transpose() * Mi;
  }
  const double inv = 1.0 / static_cast<double>(N);
  out.A *= inv;
  out.B *= inv;
  out.C *= inv;
  out.a *= inv;
  out.b *= inv;

  MatrixXd K(dx + dy, dx + dy);
  K << out.A, out.B, out.B.transpose(), -out.C;
  VectorXd rhs(dx + dy);
  rhs << -out.a, -out.b;
  Eigen::FullPivLU<MatrixXd> lu(K);
  if (!lu.isInvertible() || lu.rcond() < 1e-14)
    throw SingularityError("quadratic: KKT system is singular");
  const VectorXd sol = lu.solve(rhs);
  out.x_star = to_vector(sol.head(dx));
  out.y_star = to_vector(sol.tail(dy));

  ConstraintSet set_x = spec.set_x ? *spec.set_x : ConstraintSet::box(dx, -10.0, 10.0);
  ConstraintSet set_y = spec.set_y ? *spec.set_y : ConstraintSet::box(dy, -10.0, 10.0);
  out.saddle_interior = set_x.contains(out.x_star, 0.0) && set_y.contains(out.y_star, 0.0);

  SmoothnessMeta meta;
  meta.L_x = std::sqrt(std::max(0.0, lambda_max_sym(inv * AtA)));
  meta.L_y = std::sqrt(std::max(0.0, std::max(lambda_max_sym(inv * BtB), lambda_max_sym(inv * MtM))));
  meta.rho = std::max(0.0, -lambda_min_sym(out.A));
  meta.mu = std::sqrt(2.0 * lambda_min_sym(out.C));
  meta.theta = 0.5;
  meta.D_Y = set_y.diameter();

  // ell bounds the per-sample gradient norm over X x Y; zero when X or Y is
  // unbounded (it only enters schedules with theta != 1/2).
  const double rx = sup_norm(set_x), ry = sup_norm(set_y);
  if (std::isfinite(rx) && std::isfinite(ry)) {
    double ell = 0.0;
    for (const QuadSample& q : s) {
      const double gx = spectral_norm(q.A) * rx + spectral_norm(q.B) * ry + q.a.norm();
      const double gy = spectral_norm(q.B) * rx + spectral_norm(q.C) * ry + q.b.norm();
      ell = std::max(ell, std::hypot(gx, gy));
    }
    meta.ell = ell;
  }

  auto oracle = std::make_shared<QuadraticOracle>(std::move(s));

  // Per-sample gradient spread at the saddle and the default start.
  if (N > 1) {
    const std::vector<std::pair<Vector, Vector>> pts = {
        {set_x.project(out.x_star), set_y.project(out.y_star)},
        {set_x.default_point(), set_y.default_point()}};
    double sx = 0.0, sy = 0.0;
    Vector gx(static_cast<std::size_t>(dx)), gy(static_cast<std::size_t>(dy));
    for (const auto& [x, y] : pts) {
      VectorXd mx = VectorXd::Zero(dx), my = VectorXd::Zero(dy);
      std::vector<VectorXd> allx, ally;
      for (std::size_t i = 0; i < N; ++i) {
        oracle->grad(x, y, SampleId{i}, gx, gy);
        allx.push_back(as_eigen(gx));
        ally.push_back(as_eigen(gy));
        mx += allx.back();
        my += ally.back();
      }
      mx *= inv;
      my *= inv;
      double vx = 0.0, vy = 0.0;
      for (std::size_t i = 0; i < N; ++i) {
        vx += (allx[i] - mx).squaredNorm();
        vy += (ally[i] - my).squaredNorm();
      }
      sx = std::max(sx, std::sqrt(vx * inv));
      sy = std::max(sy, std::sqrt(vy * inv));
    }
    meta.sigma_x = sx;
    meta.sigma_y = sy;
    meta.sigma_estimated = true;
  }

  out.problem = make_problem(std::move(oracle), std::move(set_x), std::move(set_y), meta, "quadratic");
  return out;
}

double QuadraticSaddle::value(VecView x, VecView y) const {
  const auto ex = as_eigen(x);
  const auto ey = as_eigen(y);
  return 0.5 * ex.dot(A * ex) + ex.dot(B * ey) - 0.5 * ey.dot(C * ey) + a.dot(ex) + b.dot(ey);
}

Vector QuadraticSaddle::x_r(double r, VecView y, VecView z) const {
  const MatrixXd H = A + r * MatrixXd::Identity(A.rows(), A.cols());
  return to_vector(H.partialPivLu().solve(r * as_eigen(z) - B * as_eigen(y) - a));
}

double QuadraticSaddle::d_r(double r, VecView y, VecView z) const {
  const Vector x = x_r(r, y, z);
  return value(x, y) + 0.5 * r * sq_distance(x, z);
}

Vector QuadraticSaddle::y_max(double r, VecView z) const {
  const MatrixXd H = A + r * MatrixXd::Identity(A.rows(), A.cols());
  const Eigen::PartialPivLU<MatrixXd> lu = H.partialPivLu();
  const MatrixXd HB = lu.solve(B);
  const MatrixXd S = C + B.transpose() * HB;
  const VectorXd rhs = B.transpose() * lu.solve(r * as_eigen(z) - a) + b;
  return to_vector(S.partialPivLu().solve(rhs));
}

double QuadraticSaddle::p_r(double r, VecView z) const {
  const Vector y = y_max(r, z);
  return d_r(r, y, z);
}

// ---------------------------------------------------------------------------

double kl_example_value(double y) {
  if (!(y >= -2.0 && y <= 2.0)) throw DomainError("KL example: y outside [-2, 2]");
  if (y <= -1.0) return 2.0 * std::exp(y + 1.0) - 1.0;
  if (y <= 1.0) return -y * y + 2.0;
  return 2.0 * std::exp(-y + 1.0) - 1.0;
}

double kl_example_grad(double y) {
  if (!(y >= -2.0 && y <= 2.0)) throw DomainError("KL example: y outside [-2, 2]");
  if (y <= -1.0) return 2.0 * std::exp(y + 1.0);
  if (y <= 1.0) return -2.0 * y;
  return -2.0 * std::exp(-(y - 1.0));
}

ProblemInstance make_kl_example(std::size_t dim_x) {
  if (dim_x == 0) throw DimError("KL example: dim_x must be positive");
  SmoothnessMeta meta;
  meta.L_x = 1.0;
  meta.L_y = 2.0;
  meta.rho = 0.0;
  meta.ell = std::sqrt(static_cast<double>(dim_x) + 4.0);
  meta.mu = 0.1;
  meta.theta = 0.5;
  meta.D_Y = 4.0;
  return make_problem(std::make_shared<KlExampleOracle>(dim_x), ConstraintSet::box(dim_x, -1.0, 1.0),
                      ConstraintSet::box(1, -2.0, 2.0), meta, "kl-example");
}

// ---------------------------------------------------------------------------

Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open dataset " + path);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("dataset " + path + " is empty");
  const std::vector<std::string> header = split_csv(trim(line));
  if (header.size() < 3) throw ConfigError("dataset header needs features, target and group");
  const std::size_t d = header.size() - 2;
  for (std::size_t k = 0; k < d; ++k)
    if (header[k] != "feature_" + std::to_string(k))
      throw ConfigError("dataset header: expected feature_" + std::to_string(k));
  if (header[d] != "target" || header[d + 1] != "group")
    throw ConfigError("dataset header must end with target,group");

  std::vector<std::vector<double>> rows;
  std::vector<int> groups;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_csv(line);
    if (cells.size() != d + 2)
      throw ConfigError("dataset line " + std::to_string(lineno) + ": wrong number of fields");
    std::vector<double> r(d + 1);
    for (std::size_t k = 0; k <= d; ++k) r[k] = parse_double(cells[k], lineno);
    const double g = parse_double(cells[d + 1], lineno);
    if (g < 0.0 || g != std::floor(g) || g > 1e9)
      throw ConfigError("dataset line " + std::to_string(lineno) + ": bad group id");
    rows.push_back(std::move(r));
    groups.push_back(static_cast<int>(g));
  }
  Dataset data;
  data.features = MatrixXd(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
  data.targets = VectorXd(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t k = 0; k < d; ++k)
      data.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
    data.targets[static_cast<Eigen::Index>(i)] = rows[i][d];
  }
  data.group = std::move(groups);
  return data;
}

void write_dataset_csv(const std::string& path, const Dataset& data) {
  const Eigen::Index n = data.features.rows(), d = data.features.cols();
  if (data.targets.size() != n || static_cast<Eigen::Index>(data.group.size()) != n)
    throw DimError("dataset: column lengths differ");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write dataset " + path);
  for (Eigen::Index k = 0; k < d; ++k) out << "feature_" << k << ',';
  out << "target,group\n";
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < d; ++k) out << format_double(data.features(i, k)) << ',';
    out << format_double(data.targets[i]) << ',' << data.group[static_cast<std::size_t>(i)] << '\n';
  }
}

Dataset make_synthetic_group_regression(const SyntheticGroupRegression& s) {
  if (s.dim == 0 || s.n < 2) throw ConfigError("synthetic regression: need dim >= 1 and n >= 2");
  if (!(s.minority_fraction > 0.0 && s.minority_fraction < 1.0))
    throw ConfigError("synthetic regression: minority_fraction must lie in (0, 1)");
  const auto d = static_cast<Eigen::Index>(s.dim);
  std::size_t n_min = static_cast<std::size_t>(std::llround(s.minority_fraction * static_cast<double>(s.n)));
  n_min = std::clamp<std::size_t>(n_min, 1, s.n - 1);
  const std::size_t n_maj = s.n - n_min;

  std::uint64_t c = 0;
  constexpr std::uint64_t kCoef = ~std::uint64_t{0};
  VectorXd theta(d), dir(d);
  for (Eigen::Index k = 0; k < d; ++k) theta[k] = normal(s.seed, kCoef, c);
  for (Eigen::Index k = 0; k < d; ++k) dir[k] = normal(s.seed, kCoef, c);
  theta /= std::sqrt(static_cast<double>(s.dim));
  const VectorXd theta_min = theta + s.shift * dir / dir.norm();

  Dataset data;
  data.features = MatrixXd(static_cast<Eigen::Index>(s.n), d);
  data.targets = VectorXd(static_cast<Eigen::Index>(s.n));
  data.group.resize(s.n);
  for (std::size_t i = 0; i < s.n; ++i) {
    const bool minority = i >= n_maj;
    std::uint64_t ci = 0;
    const auto r = static_cast<Eigen::Index>(i);
    for (Eigen::Index k = 0; k < d; ++k) data.features(r, k) = normal(s.seed, i, ci);
    const double sd = minority ? s.noise * s.noise_ratio : s.noise;
    const VectorXd& th = minority ? theta_min : theta;
    data.targets[r] = data.features.row(r).dot(th) + sd * normal(s.seed, i, ci);
    data.group[i] = minority ? 1 : 0;
  }
  return data;
}

GroupDroSpec group_spec_from_dataset(const Dataset& data, Loss loss) {
  const Eigen::Index n = data.features.rows();
  if (data.targets.size() != n || static_cast<Eigen::Index>(data.group.size()) != n)
    throw DimError("dataset: column lengths differ");
  int groups = 0;
  for (int g : data.group) {
    if (g < 0) throw ConfigError("dataset: negative group id");
    groups = std::max(groups, g + 1);
  }
  GroupDroSpec spec;
  spec.loss = loss;
  std::vector<std::vector<Eigen::Index>> rows(static_cast<std::size_t>(groups));
  for (Eigen::Index i = 0; i < n; ++i) rows[static_cast<std::size_t>(data.group[static_cast<std::size_t>(i)])].push_back(i);
  for (int g = 0; g < groups; ++g) {
    const auto& idx = rows[static_cast<std::size_t>(g)];
    if (idx.empty()) throw EmptyGroupError("group " + std::to_string(g) + " has no rows");
    MatrixXd X(static_cast<Eigen::Index>(idx.size()), data.features.cols());
    VectorXd t(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t j = 0; j < idx.size(); ++j) {
      X.row(static_cast<Eigen::Index>(j)) = data.features.row(idx[j]);
      t[static_cast<Eigen::Index>(j)] = data.targets[idx[j]];
    }
    spec.features.push_back(std::move(X));
    spec.targets.push_back(std::move(t));
  }
  if (groups == 0) throw ConfigError("dataset has no rows");
  return spec;
}

MoreauComposite make_group_dro(const GroupDroSpec& spec) {
  PooledGroups pg = pool(spec);
  check_targets(spec.loss, pg.data);
  const std::size_t d = static_cast<std::size_t>(pg.data.X.cols());
  const std::size_t G = pg.index.size.size();
  ConstraintSet set_x = group_set_x(spec, d);
  const double R = finite_radius(set_x, "group DRO");
  const LossBounds lb = loss_bounds(spec.loss, pg.data, R);
  const double w_max = static_cast<double>(pg.data.X.rows()) /
                       *std::min_element(pg.index.size.begin(), pg.index.size.end());

  MoreauComposite comp;
  comp.constants.ell_c = lb.ell_c;
  comp.constants.L_c = lb.L_c;
  comp.constants.ell_h = 1.0;
  comp.constants.ell_phi = w_max * std::max(1.0, lb.u_max);
  comp.constants.L_phi = w_max;
  comp.constants.delta_tilde = spec.delta_tilde;
  comp.constants.d_h = 1;
  comp.h = {loss_component(spec.loss)};
  comp.model = std::make_shared<GroupDroModel>(std::move(pg.data), spec.loss, std::move(pg.index));
  comp.set_x = std::move(set_x);
  comp.set_y = ConstraintSet::simplex(G);
  comp.base_meta.mu = spec.mu;
  comp.base_meta.theta = spec.theta;
  comp.base_meta.D_Y = comp.set_y.diameter();
  comp.name = "group-dro";
  comp.validate();
  return comp;
}

ProblemInstance make_group_dro_problem(const GroupDroSpec& spec) {
  if (spec.loss != Loss::squared) throw ConfigError("smooth group DRO needs the squared loss");
  PooledGroups pg = pool(spec);
  const std::size_t d = static_cast<std::size_t>(pg.data.X.cols());
  const std::size_t G = pg.index.size.size();
  ConstraintSet set_x = group_set_x(spec, d);
  const double R = finite_radius(set_x, "group DRO");
  const LossBounds lb = loss_bounds(Loss::squared, pg.data, R);
  const double w_max = static_cast<double>(pg.data.X.rows()) /
                       *std::min_element(pg.index.size.begin(), pg.index.size.end());

  SmoothnessMeta meta;
  meta.L_x = w_max * lb.L_c;
  meta.L_y = w_max * lb.ell_c;
  meta.rho = 0.0;
  meta.ell = w_max * std::hypot(lb.ell_c, lb.u_max);
  meta.mu = spec.mu;
  meta.theta = spec.theta;
  ConstraintSet set_y = ConstraintSet::simplex(G);
  meta.D_Y = set_y.diameter();
  auto oracle = std::make_shared<GroupDroOracle>(std::move(pg.data), std::move(pg.index));
  return make_problem(std::move(oracle), std::move(set_x), std::move(set_y), meta, "group-dro");
}

Vector group_losses(const GroupDroSpec& spec, VecView theta) {
  Vector out;
  for (std::size_t g = 0; g < spec.features.size(); ++g) {
    const MatrixXd& X = spec.features[g];
    if (X.rows() == 0) throw EmptyGroupError("group " + std::to_string(g) + " is empty");
    check_dim(theta.size(), static_cast<std::size_t>(X.cols()), "theta");
    const VectorXd pred = X * as_eigen(theta);
    double s = 0.0;
    for (Eigen::Index i = 0; i < X.rows(); ++i) s += loss_value(spec.loss, pred[i], spec.targets[g][i]);
    out.push_back(s / static_cast<double>(X.rows()));
  }
  return out;
}

Vector erm_least_squares(const GroupDroSpec& spec) {
  const PooledGroups pg = pool(spec);
  const VectorXd th = pg.data.X.colPivHouseholderQr().solve(pg.data.t);
  return to_vector(th);
}

// ---------------------------------------------------------------------------

double psi_value(Divergence d, double t) {
  switch (d) {
    case Divergence::chi_square: return 0.5 * (t - 1.0) * (t - 1.0);
    case Divergence::kl: return t > 0.0 ? t * std::log(t) - t + 1.0 : 1.0;
  }
  return 0.0;
}

double psi_derivative(Divergence d, double t) {
  switch (d) {
    case Divergence::chi_square: return t - 1.0;
    // log t diverges at the simplex boundary; clamp so gradients stay finite.
    case Divergence::kl: return std::log(std::max(t, std::numeric_limits<double>::min()));
  }
  return 0.0;
}

ProblemInstance make_phi_div_dro(const PhiDivDroSpec& spec) {
  check_phi_spec(spec);
  if (spec.loss != Loss::squared) throw ConfigError("smooth phi-divergence DRO needs the squared loss");
  LinearData data = make_linear_data(spec.features, spec.targets);
  const std::size_t d = static_cast<std::size_t>(data.X.cols());
  const std::size_t N = static_cast<std::size_t>(data.X.rows());
  const double n = static_cast<double>(N);
  ConstraintSet set_x = spec.set_x ? *spec.set_x : ConstraintSet::box(d, -10.0, 10.0);
  check_dim(set_x.dim(), d, "phi-divergence set_x");
  const double R = finite_radius(set_x, "phi-divergence DRO");
  const LossBounds lb = loss_bounds(Loss::squared, data, R);

  SmoothnessMeta meta;
  meta.L_x = n * lb.L_c;
  meta.L_y = std::max(n * lb.ell_c, spec.lambda_pen * n * n * psi_curvature_bound(spec.psi));
  meta.rho = 0.0;
  meta.ell = n * std::hypot(lb.ell_c, lb.u_max + spec.lambda_pen * psi_slope_bound(spec.psi, n));
  if (spec.psi == Divergence::chi_square && spec.lambda_pen > 0.0) {
    // -lambda/N sum psi(N q_i) is (lambda N)-strongly concave in q.
    meta.mu = std::sqrt(2.0 * spec.lambda_pen * n);
    meta.theta = 0.5;
  }
  ConstraintSet set_y = ConstraintSet::simplex(N);
  meta.D_Y = set_y.diameter();
  auto oracle = std::make_shared<PhiDivOracle>(std::move(data), spec.psi, spec.lambda_pen);
  return make_problem(std::move(oracle), std::move(set_x), std::move(set_y), meta, "phi-div-dro");
}

MoreauComposite make_phi_div_dro_composite(const PhiDivDroSpec& spec) {
  check_phi_spec(spec);
  LinearData data = make_linear_data(spec.features, spec.targets);
  check_targets(spec.loss, data);
  const std::size_t d = static_cast<std::size_t>(data.X.cols());
  const std::size_t N = static_cast<std::size_t>(data.X.rows());
  const double n = static_cast<double>(N);
  ConstraintSet set_x = spec.set_x ? *spec.set_x : ConstraintSet::box(d, -10.0, 10.0);
  check_dim(set_x.dim(), d, "phi-divergence set_x");
  const double R = finite_radius(set_x, "phi-divergence DRO");
  const LossBounds lb = loss_bounds(spec.loss, data, R);

  MoreauComposite comp;
  comp.constants.ell_c = lb.ell_c;
  comp.constants.L_c = lb.L_c;
  comp.constants.ell_h = 1.0;
  comp.constants.ell_phi = n * std::max(1.0, lb.u_max + spec.lambda_pen * psi_slope_bound(spec.psi, n));
  comp.constants.L_phi = std::max(n, spec.lambda_pen * n * n * psi_curvature_bound(spec.psi));
  comp.constants.delta_tilde = spec.delta_tilde;
  comp.constants.d_h = 1;
  comp.h = {loss_component(spec.loss)};
  comp.model = std::make_shared<PhiDivModel>(std::move(data), spec.loss, spec.psi, spec.lambda_pen);
  comp.set_x = std::move(set_x);
  comp.set_y = ConstraintSet::simplex(N);
  if (spec.psi == Divergence::chi_square && spec.lambda_pen > 0.0) {
    comp.base_meta.mu = std::sqrt(2.0 * spec.lambda_pen * n);
    comp.base_meta.theta = 0.5;
  }
  comp.base_meta.D_Y = comp.set_y.diameter();
  comp.name = "phi-div-dro";
  comp.validate();
  return comp;
}

}  // namespace sgda
