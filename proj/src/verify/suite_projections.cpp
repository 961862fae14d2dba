#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "common.hpp"

namespace sgda::verify {

namespace {

/// Minimizer of a unimodal function on [a, b].
double golden_section(const std::function<double(double)>& f, double a, double b, int iters = 200) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iters && b - a > 1e-15 * (1.0 + std::abs(a) + std::abs(b)); ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

Vector box_oracle(const Vector& lo, const Vector& hi, const Vector& v) {
  Vector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double t = golden_section([&](double s) { return (s - v[i]) * (s - v[i]); }, lo[i], hi[i]);
    // Golden section stops within rounding of the optimum; snap to an end
    // when the quadratic is no better there.
    const double cands[3] = {t, lo[i], hi[i]};
    double best = t, fb = (t - v[i]) * (t - v[i]);
    for (double c : cands)
      if ((c - v[i]) * (c - v[i]) < fb) best = c, fb = (c - v[i]) * (c - v[i]);
    out[i] = best;
  }
  return out;
}

/// Lagrange multiplier nu >= 0 by bisection: x = (v + nu c) / (1 + nu).
Vector ball_oracle(const Vector& c, double R, const Vector& v) {
  auto at = [&](double nu) {
    Vector x(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) x[i] = (v[i] + nu * c[i]) / (1.0 + nu);
    return x;
  };
  auto dist_c = [&](const Vector& x) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - c[i]) * (x[i] - c[i]);
    return std::sqrt(s);
  };
  if (dist_c(v) <= R) return v;
  double lo = 0.0, hi = 1.0;
  while (dist_c(at(hi)) > R) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (dist_c(at(mid)) > R ? lo : hi) = mid;
  }
  return at(hi);
}

/// Enumerates supports: on support S the projection onto the face is
/// v_S - (sum v_S - 1)/|S|; keep the nearest feasible candidate.
Vector simplex_oracle(const Vector& v) {
  const std::size_t n = v.size();
  Vector best;
  double best_d = std::numeric_limits<double>::infinity();
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    double sum = 0.0;
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (1u << i)) sum += v[i], ++k;
    const double shift = (sum - 1.0) / static_cast<double>(k);
    Vector x(n, 0.0);
    bool feasible = true;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (1u << i)) {
        x[i] = v[i] - shift;
        if (x[i] < 0.0) feasible = false;
      }
    if (!feasible) continue;
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) d += (x[i] - v[i]) * (x[i] - v[i]);
    if (d < best_d) best_d = d, best = x;
  }
  return best;
}

double max_abs_diff(const Vector& a, const Vector& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Normal-cone oracles: dist(0, g + N(x)) by one-dimensional convex searches.

double box_cone_oracle(const Vector& lo, const Vector& hi, const Vector& x, const Vector& g) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const bool at_lo = std::abs(x[i] - lo[i]) <= 1e-12;
    const bool at_hi = std::abs(x[i] - hi[i]) <= 1e-12;
    const double span = 10.0 + 2.0 * std::abs(g[i]);
    // Normal cone component: (-inf, 0] at lo, [0, inf) at hi, R if both.
    const double a = at_lo ? -span : 0.0, b = at_hi ? span : 0.0;
    const double t = golden_section([&](double n) { return std::abs(g[i] + n); }, a, b);
    double best = std::abs(g[i] + t);
    best = std::min(best, std::abs(g[i] + a));
    best = std::min(best, std::abs(g[i] + b));
    s += best * best;
  }
  return std::sqrt(s);
}

double ball_cone_oracle(const Vector& c, double R, const Vector& x, const Vector& g) {
  Vector u(x.size());
  double dn = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) u[i] = x[i] - c[i], dn += u[i] * u[i];
  auto val = [&](double t) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += (g[i] + t * u[i]) * (g[i] + t * u[i]);
    return std::sqrt(s);
  };
  if (std::abs(std::sqrt(dn) - R) > 1e-12 * std::max(1.0, R)) return val(0.0);
  double span = 1.0;
  while (val(span) < val(span / 2.0) || span < 10.0) span *= 2.0;
  const double t = golden_section(val, 0.0, span);
  return std::min(val(t), val(0.0));
}

double simplex_cone_oracle(const Vector& x, const Vector& g) {
  // N(x) = {s 1 - w : w >= 0, w_i = 0 where x_i > 0}; for fixed s the best w
  // leaves min(0, g_i + s) on active coordinates.
  auto val = [&](double s) {
    double v = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double t = g[i] + s;
      const double e = x[i] <= 1e-12 ? std::min(0.0, t) : t;
      v += e * e;
    }
    return std::sqrt(v);
  };
  double span = 1.0;
  for (double gi : g) span = std::max(span, 4.0 * std::abs(gi) + 1.0);
  const double s = golden_section(val, -span, span);
  return val(s);
}

Vector random_box_point(Rng& rng, const Vector& lo, const Vector& hi) {
  Vector x(lo.size());
  for (std::size_t i = 0; i < lo.size(); ++i) {
    const std::size_t pick = rng.index(3);
    x[i] = pick == 0 ? lo[i] : pick == 1 ? hi[i] : rng.uniform(lo[i], hi[i]);
  }
  return x;
}

}  // namespace

SuiteResult suite_projections() {
  SuiteResult r;
  constexpr int kCases = 1000;
  constexpr double kTol = 1e-8;
  Rng rng(20261014);

  double box_err = 0.0, ball_err = 0.0, simplex_err = 0.0, full_err = 0.0;
  double box_nc = 0.0, ball_nc = 0.0, simplex_nc = 0.0, full_nc = 0.0;
  for (int c = 0; c < kCases; ++c) {
    const std::size_t d = 1 + rng.index(5);
    // Box
    {
      Vector lo(d), hi(d);
      for (std::size_t i = 0; i < d; ++i) {
        lo[i] = rng.uniform(-3.0, 1.0);
        hi[i] = rng.index(10) == 0 ? lo[i] : lo[i] + rng.uniform(0.0, 3.0);
      }
      const ConstraintSet s = ConstraintSet::box(lo, hi);
      const Vector v = rng.uniform_vector(d, -6.0, 6.0);
      box_err = std::max(box_err, max_abs_diff(s.project(v), box_oracle(lo, hi, v)));
      const Vector x = random_box_point(rng, lo, hi);
      const Vector g = rng.normal_vector(d);
      box_nc = std::max(box_nc, std::abs(s.normal_cone_dist(x, g) - box_cone_oracle(lo, hi, x, g)));
    }
    // Ball
    {
      const Vector center = rng.uniform_vector(d, -2.0, 2.0);
      const double R = rng.uniform(0.1, 3.0);
      const ConstraintSet s = ConstraintSet::ball(center, R);
      const Vector v = rng.uniform_vector(d, -6.0, 6.0);
      ball_err = std::max(ball_err, max_abs_diff(s.project(v), ball_oracle(center, R, v)));
      Vector dir = rng.normal_vector(d);
      double dn = 0.0;
      for (double e : dir) dn += e * e;
      dn = std::sqrt(dn);
      const double rad = rng.index(2) == 0 ? R : rng.uniform(0.0, R);
      Vector x(d);
      for (std::size_t i = 0; i < d; ++i) x[i] = center[i] + rad * dir[i] / dn;
      const Vector g = rng.normal_vector(d);
      ball_nc = std::max(ball_nc, std::abs(s.normal_cone_dist(x, g) - ball_cone_oracle(center, R, x, g)));
    }
    // Simplex
    {
      const ConstraintSet s = ConstraintSet::simplex(d);
      Vector v = rng.uniform_vector(d, -2.0, 2.0);
      simplex_err = std::max(simplex_err, max_abs_diff(s.project(v), simplex_oracle(v)));
      Vector x(d);
      double sum = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        x[i] = rng.index(3) == 0 ? 0.0 : rng.uniform(0.0, 1.0);
        sum += x[i];
      }
      if (sum == 0.0) x[rng.index(d)] = sum = 1.0;
      for (double& e : x) e /= sum;
      const Vector g = rng.normal_vector(d);
      simplex_nc = std::max(simplex_nc, std::abs(s.normal_cone_dist(x, g) - simplex_cone_oracle(x, g)));
    }
    // Full space: projection is the identity and the cone is {0}.
    {
      const ConstraintSet s = ConstraintSet::full_space(d);
      const Vector v = rng.uniform_vector(d, -6.0, 6.0);
      full_err = std::max(full_err, max_abs_diff(s.project(v), v));
      const Vector g = rng.normal_vector(d);
      double gn = 0.0;
      for (double e : g) gn += e * e;
      full_nc = std::max(full_nc, std::abs(s.normal_cone_dist(v, g) - std::sqrt(gn)));
    }
  }
  auto add = [&](const char* name, double err) {
    r.checks.push_back(check(name, err <= kTol, fmt("max deviation %.3g over %d cases", err, kCases)));
  };
  add("box projection", box_err);
  add("ball projection", ball_err);
  add("simplex projection", simplex_err);
  add("full-space projection", full_err);
  add("box normal cone", box_nc);
  add("ball normal cone", ball_nc);
  add("simplex normal cone", simplex_nc);
  add("full-space normal cone", full_nc);
  return r;
}

}  // namespace sgda::verify
