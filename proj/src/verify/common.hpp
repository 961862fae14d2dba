#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <cstdio>
#include <string>
#include <utility>

#include "sgda/problems.hpp"
#include "sgda/rng.hpp"
#include "sgda/verify.hpp"

namespace sgda::verify {

/// Sequential draws from the counter-based generator.
class Rng {
public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) : key_{seed, stream, 0, streams::monte_carlo} {}
  std::uint64_t next() { return counter_hash(key_, n_++); }
  double uniform(double lo = 0.0, double hi = 1.0) { return lo + (hi - lo) * unit_double(next()); }
  double normal() {
    const std::uint64_t a = next();
    return normal_from(a, next());
  }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(bounded(next(), n)); }
  Vector normal_vector(std::size_t d) {
    Vector v(d);
    for (double& x : v) x = normal();
    return v;
  }
  Vector uniform_vector(std::size_t d, double lo, double hi) {
    Vector v(d);
    for (double& x : v) x = uniform(lo, hi);
    return v;
  }
  Eigen::MatrixXd normal_matrix(Eigen::Index r, Eigen::Index c, double scale = 1.0) {
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index j = 0; j < c; ++j) m(i, j) = scale * normal();
    return m;
  }

private:
  BatchKey key_;
  std::uint64_t n_ = 0;
};

template <class... Args>
std::string fmt(const char* format, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

inline Check check(std::string name, bool pass, std::string detail) {
  return Check{std::move(name), pass, std::move(detail)};
}

/// Two-block quadratic with a nonconvex x-block and a saddle away from the
/// box midpoint (the default start).
QuadraticSaddle saddle_fixture(std::size_t N = 8, std::uint64_t seed = 7);

/// Random quadratic with strongly concave y-block: dims, sample count,
/// matrix heterogeneity and linear-term noise.
QuadraticSaddle random_quadratic(std::size_t dx, std::size_t dy, std::size_t N, double heterogeneity,
                                 double offset_noise, std::uint64_t seed, double box = 10.0);

// Suites, one per acceptance criterion.
SuiteResult suite_kl_example();
SuiteResult suite_estimator();
SuiteResult suite_estimator_error();
SuiteResult suite_convergence();
SuiteResult suite_smoothing_bias();
SuiteResult suite_gradients();
SuiteResult suite_projections();
SuiteResult suite_group_dro();
SuiteResult suite_output_sampling();
SuiteResult suite_complexity_trend();
SuiteResult suite_tuner();
SuiteResult suite_lyapunov();

}  // namespace sgda::verify
