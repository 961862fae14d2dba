#include "kernels_impl.hpp"

namespace sgda::kernels::detail {

namespace {

void add(double* acc, const double* v, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) acc[i] += v[i];
}

void add_diff(double* acc, const double* a, const double* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) acc[i] += a[i] - b[i];
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scale(double* v, double s, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) v[i] *= s;
}

void divide(double* v, double d, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) v[i] /= d;
}

void primal_step(const double* x, const double* g, const double* z, double alpha, double r,
                 double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] - alpha * (g[i] + r * (x[i] - z[i]));
}

void relax(double* z, const double* x, double beta, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) z[i] += beta * (x[i] - z[i]);
}

// Written as the compare-select pair used by maxpd/minpd so that signed
// zeros resolve the same way in every variant.
void clamp(const double* v, const double* lo, const double* hi, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double t = v[i] > lo[i] ? v[i] : lo[i];
    out[i] = t < hi[i] ? t : hi[i];
  }
}

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sq_dist(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace

const KernelTable kScalarTable{Isa::scalar, add,   add_diff, axpy, scale, divide,
                               primal_step, relax, clamp,    dot,  sq_dist};

}  // namespace sgda::kernels::detail
