#include "sgda/tuner.hpp"

#include <cmath>
#include <limits>

#include "sgda/log.hpp"

namespace sgda {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::size_t ceil_to_size(double v, const char* what) {
  if (!std::isfinite(v) || v > 1e18) throw OverflowError(std::string(what) + " is not representable");
  const double c = std::ceil(v);
  return c < 1.0 ? 1 : static_cast<std::size_t>(c);
}

double pos_pow(double base, double e) { return std::pow(base, e); }

}  // namespace

void TunerInput::validate() const {
  meta.validate();
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ConfigError("epsilon must be positive");
  if (!(delta_phi > 0.0) || !std::isfinite(delta_phi))
    throw ConfigError("delta_phi must be positive");
  if (!(asymptotic_constant > 0.0) || !std::isfinite(asymptotic_constant))
    throw ConfigError("asymptotic_constant must be positive");
  if (!(sample_cap > 0.0)) throw ConfigError("sample_cap must be positive");
  if (!std::isfinite(meta.D_Y)) throw ConfigError("the tuner needs a bounded Y (finite D_Y)");
  if (const auto* fs = std::get_if<FiniteSum>(&regime); fs && fs->n == 0)
    throw ConfigError("finite-sum regime needs N >= 1");
}

std::optional<double> AuditRecord::get(const std::string& name) const {
  for (const auto& [k, v] : entries)
    if (k == name) return v;
  return std::nullopt;
}

double compute_r(const SmoothnessMeta& m) {
  const double b1 =
      2.0 * m.rho + 325.0 * (m.L_y + 1.0) + 12.0 * std::sqrt(m.L_x) * std::sqrt(2.0 * (m.L_y + 1.0));
  const double b2 = 2.0 * m.rho + 54.0 * m.L_y * (m.L_y + 1.0) +
                    4.0 * std::sqrt(m.L_x) * std::sqrt(3.0 * m.L_y * (m.L_y + 1.0));
  return std::max(b1, b2);
}

double alpha_x_lower_bound(const SmoothnessMeta& m, double r) {
  const double gap = r - m.rho;
  return 24.0 * (m.L_y + 1.0) / (gap * gap);
}

void check_alpha_x_interval(const SmoothnessMeta& m, double r, double alpha_x) {
  if (!(r >= 2.0 * m.rho) || !(r >= m.L_y + m.rho) || !(r > m.rho))
    throw InfeasibleScheduleError("r must satisfy r >= max(2 rho, L_y + rho)");
  const double lower = alpha_x_lower_bound(m, r);
  const double b1 = 1.0 / (12.0 * (r + m.L_x + 2.0 * m.L_y));
  const double b2 = (r - m.rho) * (r - m.rho) / (24.0 * (r + m.L_x) * (r + m.L_x) * (m.L_y + 1.0));
  const double b3 = m.L_y > 0.0 ? (r - (m.rho + 2.0 * m.L_y)) / (2.0 * m.L_y * (m.L_x + r)) : kInf;
  const double upper = std::min({b1, b2, b3});
  if (!(lower <= upper))
    throw InfeasibleScheduleError("empty step-size interval for alpha_x: lower bound " +
                                  std::to_string(lower) + " exceeds upper bound " +
                                  std::to_string(upper) + " (r too small)");
  if (!(alpha_x >= lower && alpha_x <= upper))
    throw InfeasibleScheduleError("alpha_x outside the admissible interval [" +
                                  std::to_string(lower) + ", " + std::to_string(upper) + "]");
}

double compute_alpha_x(const SmoothnessMeta& m, double r) {
  const double b1 = 1.0 / (12.0 * (r + m.L_x + 2.0 * m.L_y));
  const double b2 = (r - m.rho) * (r - m.rho) / (24.0 * (r + m.L_x) * (r + m.L_x) * (m.L_y + 1.0));
  const double b3 = m.L_y > 0.0 ? (r - (m.rho + 2.0 * m.L_y)) / (2.0 * m.L_y * (m.L_x + r)) : kInf;
  const double a = std::min({b1, b2, b3});
  check_alpha_x_interval(m, r, a);
  return a;
}

double compute_alpha_y(const SmoothnessMeta& m, double alpha_x) {
  const double b2 = m.L_y > 0.0 ? 1.0 / (40.0 * m.L_y) : kInf;
  const double b3 = 1.0 / (4.0 * (2.0 * m.L_y + 1.0));
  return std::min({alpha_x, b2, b3});
}

double compute_varpi(const SmoothnessMeta& m, double r, double alpha_y) {
  const double gap = r - m.rho;
  const double sigma2 = 2.0 + m.L_y / gap;
  const double Ly2 = m.L_y * m.L_y;
  const double inner = 2.0 / (alpha_y * alpha_y) + 2.0 * Ly2 * sigma2 * sigma2 + 2.0 * Ly2;
  return 2.0 * std::pow(m.ell * m.D_Y, 1.0 - 2.0 * m.theta) / gap * inner / (m.mu * m.mu);
}

double compute_beta(const SmoothnessMeta& m, double r, double alpha_x, double alpha_y,
                    double epsilon, double c) {
  const double th = m.theta;
  double beta;
  if (th <= 0.5) {
    const double varpi = compute_varpi(m, r, alpha_y);
    // With L_y = 0 the dual error-bound branch imposes no restriction.
    const double b3 = (m.L_y > 0.0 && varpi > 0.0) ? m.L_y / (20.0 * r * varpi) : kInf;
    beta = std::min({1.0 / 30.0, 1.0 / (30.0 * r), b3});
  } else {
    const double e1 = (2.0 * th - 1.0) / (2.0 * th);
    const double e2 = (2.0 * th - 1.0) / th;
    const double t1 = 1.0 / r;
    const double t2 = pos_pow(alpha_x, e1) * pos_pow(m.L_y, -1.0 / (2.0 * th)) *
                      pos_pow(m.mu, 1.0 / th) * pos_pow(epsilon, e2);
    const double t3 = pos_pow(r, -(2.0 * th - 1.0)) * m.mu * m.mu / m.L_y *
                      pos_pow(epsilon, 4.0 * th - 2.0);
    const double t4 = pos_pow(r, -e2) * pos_pow(m.L_y, (th - 1.0) / th) * pos_pow(m.mu, 1.0 / th) *
                      pos_pow(epsilon, e2);
    beta = c * std::min({t1, t2, t3, t4});
  }
  beta = std::min(beta, 1.0 / 30.0);
  if (!(beta > 0.0)) throw InfeasibleScheduleError("beta schedule evaluated to a nonpositive value");
  return beta;
}

double kt_target_low(const SmoothnessMeta& m, double eps, double dphi) {
  const double a = std::max(m.L_x + m.L_y * m.L_y, (m.L_y + std::sqrt(m.L_x)) / (m.mu * m.mu));
  return dphi * a / (eps * eps);
}

namespace {

// The four-term max shared by the high-KL iteration and batch schedules.
double high_kl_max(const SmoothnessMeta& m, double eps) {
  const double th = m.theta;
  const double Ly = m.L_y, Lx = m.L_x, sLx = std::sqrt(Lx), mu = m.mu;
  const double q = Ly * Ly + Ly * sLx;
  const double e41 = (4.0 * th - 1.0) / th;
  const double t1 = Ly * Ly * (Ly * Ly + Lx) / (eps * eps);
  const double t2 = std::pow(q, 2.0 * th) * Ly / (mu * mu * std::pow(eps, 4.0 * th));
  const double t3 = std::pow(Lx + Ly * Ly, (2.0 * th - 1.0) / (2.0 * th)) *
                    std::pow(Ly, 1.0 / (2.0 * th)) * q / (std::pow(mu, 1.0 / th) * std::pow(eps, e41));
  const double t4 = Ly * Ly * std::pow(Ly + sLx, (3.0 * th - 1.0) / th) /
                    (std::pow(mu, 1.0 / th) * std::pow(eps, e41));
  return std::max({t1, t2, t3, t4});
}

}  // namespace

double kt_target_high(const SmoothnessMeta& m, double eps, double dphi) {
  return dphi * high_kl_max(m, eps);
}

double online_batch_low(const SmoothnessMeta& m, double eps) {
  const double s2 = m.sigma_x * m.sigma_x + m.sigma_y * m.sigma_y;
  const double Ly2 = m.L_y * m.L_y;
  const double denom = Ly2 + m.L_x;
  if (denom == 0.0) return 0.0;
  const double a = std::max(m.L_x + Ly2, (m.L_y + std::sqrt(m.L_x)) / (m.mu * m.mu));
  return Ly2 * s2 / (denom * eps * eps) * a;
}

double online_batch_high(const SmoothnessMeta& m, double eps) {
  const double s2 = m.sigma_x * m.sigma_x + m.sigma_y * m.sigma_y;
  const double denom = m.L_y * m.L_y + m.L_x;
  if (denom == 0.0) return 0.0;
  return s2 / denom * high_kl_max(m, eps);
}

Budget compute_budget(const TunerInput& in, double /*r*/, double /*alpha_x*/) {
  const SmoothnessMeta& m = in.meta;
  const double c = in.asymptotic_constant;
  const bool low = m.theta <= 0.5;
  Budget b{};
  const double kt = c * (low ? kt_target_low(m, in.epsilon, in.delta_phi)
                             : kt_target_high(m, in.epsilon, in.delta_phi));
  b.kt_target = kt;
  if (const auto* fs = std::get_if<FiniteSum>(&in.regime)) {
    b.B = fs->n;
    b.b_raw = 0.0;
  } else {
    b.b_raw = c * (low ? online_batch_low(m, in.epsilon) : online_batch_high(m, in.epsilon));
    b.B = ceil_to_size(b.b_raw, "online batch size B");
  }
  if (in.overrides.B) b.B = *in.overrides.B;
  if (b.B == 0) throw ConfigError("B must be positive");
  const std::size_t tm = ceil_to_size(std::sqrt(static_cast<double>(b.B) / 2.0), "T");
  b.T = in.overrides.T.value_or(tm);
  b.M = in.overrides.M.value_or(tm);
  if (b.T == 0 || b.M == 0) throw ConfigError("T and M must be positive");
  b.K = in.overrides.K ? *in.overrides.K : ceil_to_size(kt / static_cast<double>(b.T), "K");
  if (b.K == 0) throw ConfigError("K must be positive");

  std::size_t per_recursion = b.M;
  if (const auto* fs = std::get_if<FiniteSum>(&in.regime)) per_recursion = std::min(b.M, fs->n);
  const double total = static_cast<double>(b.B) +
                       static_cast<double>(b.K) * (static_cast<double>(b.B) +
                                                   static_cast<double>(b.T - 1) *
                                                       static_cast<double>(per_recursion));
  if (total > in.sample_cap)
    throw OverflowError("schedule needs about " + std::to_string(total) +
                        " samples, above the cap of " + std::to_string(in.sample_cap));
  return b;
}

TunedSchedule tune_smooth(const TunerInput& in) {
  in.validate();
  const SmoothnessMeta& m = in.meta;
  TunedSchedule out;
  AuditRecord& a = out.audit;
  a.input = in;
  a.add("rho", m.rho);
  a.add("L_x", m.L_x);
  a.add("L_y", m.L_y);
  a.add("ell", m.ell);
  a.add("mu", m.mu);
  a.add("theta", m.theta);
  a.add("sigma_x", m.sigma_x);
  a.add("sigma_y", m.sigma_y);
  a.add("D_Y", m.D_Y);
  a.add("epsilon", in.epsilon);
  a.add("delta_phi", in.delta_phi);
  a.add("asymptotic_constant", in.asymptotic_constant);

  a.add("r_branch_1", 2.0 * m.rho + 325.0 * (m.L_y + 1.0) +
                          12.0 * std::sqrt(m.L_x) * std::sqrt(2.0 * (m.L_y + 1.0)));
  a.add("r_branch_2", 2.0 * m.rho + 54.0 * m.L_y * (m.L_y + 1.0) +
                          4.0 * std::sqrt(m.L_x) * std::sqrt(3.0 * m.L_y * (m.L_y + 1.0)));
  const double r = in.overrides.r.value_or(compute_r(m));
  a.add("r", r);

  a.add("alpha_x_branch_1", 1.0 / (12.0 * (r + m.L_x + 2.0 * m.L_y)));
  a.add("alpha_x_branch_2",
        (r - m.rho) * (r - m.rho) / (24.0 * (r + m.L_x) * (r + m.L_x) * (m.L_y + 1.0)));
  a.add("alpha_x_branch_3",
        m.L_y > 0.0 ? (r - (m.rho + 2.0 * m.L_y)) / (2.0 * m.L_y * (m.L_x + r)) : kInf);
  a.add("alpha_x_lower_bound", alpha_x_lower_bound(m, r));
  double alpha_x;
  if (in.overrides.alpha_x) {
    alpha_x = *in.overrides.alpha_x;
    check_alpha_x_interval(m, r, alpha_x);
  } else {
    alpha_x = compute_alpha_x(m, r);
  }
  a.add("alpha_x", alpha_x);

  const double alpha_y = in.overrides.alpha_y.value_or(compute_alpha_y(m, alpha_x));
  a.add("alpha_y", alpha_y);
  a.add("sigma_2", 2.0 + m.L_y / (r - m.rho));
  a.add("varpi", compute_varpi(m, r, alpha_y));
  const double beta = in.overrides.beta.value_or(
      compute_beta(m, r, alpha_x, alpha_y, in.epsilon, in.asymptotic_constant));
  a.add("beta", beta);

  const Budget b = compute_budget(in, r, alpha_x);
  a.add("kt_target", b.kt_target);
  a.add("b_raw", b.b_raw);
  a.add("B", static_cast<double>(b.B));
  a.add("T", static_cast<double>(b.T));
  a.add("M", static_cast<double>(b.M));
  a.add("K", static_cast<double>(b.K));

  SolverConfig& c = out.config;
  c.K = b.K;
  c.T = b.T;
  c.M = b.M;
  c.B = b.B;
  c.r = r;
  c.alpha_x = alpha_x;
  c.alpha_y = alpha_y;
  c.beta = beta;
  c.seed = in.seed;
  c.validate();
  return out;
}

NonsmoothSchedule tune_nonsmooth(const TunerInput& in, const CompositeConstants& k,
                                 LambdaChoice choice) {
  const double sdh = std::sqrt(static_cast<double>(k.d_h));
  const double cap = k.ell_h > 0.0 ? 2.0 * k.delta_tilde / (k.ell_h * k.ell_h * sdh) : kInf;
  double lambda;
  if (choice.given) {
    lambda = *choice.given;
    if (!(lambda > 0.0)) throw ConfigError("lambda must be positive");
    if (lambda > cap) {
      log_warning("requested lambda " + std::to_string(lambda) +
                  " exceeds the KL-transfer limit; clamped to " + std::to_string(cap));
      lambda = cap;
    }
  } else {
    lambda = std::min(in.asymptotic_constant * in.epsilon, cap);
  }
  if (!(lambda > 0.0)) throw ConfigError("lambda evaluated to zero (is delta_tilde positive?)");

  const SmoothedConstants s = smoothed_constants(k, lambda);
  TunerInput sub = in;
  sub.meta.L_x = s.L_x;
  sub.meta.L_y = s.L_y;
  sub.meta.rho = s.rho;
  sub.meta.ell = s.ell;
  NonsmoothSchedule out{lambda, sub.meta, tune_smooth(sub)};
  out.schedule.audit.add("lambda", lambda);
  out.schedule.audit.add("lambda_cap", cap);
  return out;
}

TunerInput tuner_input_for(const ProblemInstance& problem, double epsilon, double delta_phi) {
  if (!problem.set_y.bounded()) throw ConfigError("the tuner rejects an unbounded Y");
  TunerInput in;
  in.meta = problem.meta;
  in.meta.D_Y = problem.set_y.diameter();
  in.epsilon = epsilon;
  in.delta_phi = delta_phi;
  in.regime = problem.regime();
  return in;
}

}  // namespace sgda
