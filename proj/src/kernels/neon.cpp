#include "kernels_impl.hpp"

#if defined(__aarch64__)
#include <arm_neon.h>

namespace sgda::kernels::detail {

namespace {

void add(double* acc, const double* v, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(acc + i, vaddq_f64(vld1q_f64(acc + i), vld1q_f64(v + i)));
  for (; i < n; ++i) acc[i] += v[i];
}

void add_diff(double* acc, const double* a, const double* b, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t d = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
    vst1q_f64(acc + i, vaddq_f64(vld1q_f64(acc + i), d));
  }
  for (; i < n; ++i) acc[i] += a[i] - b[i];
}

// vmulq + vaddq rather than vfmaq: fused results would differ from scalar.
void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vmulq_f64(va, vld1q_f64(x + i))));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void scale(double* v, double s, std::size_t n) {
  const float64x2_t vs = vdupq_n_f64(s);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(v + i, vmulq_f64(vld1q_f64(v + i), vs));
  for (; i < n; ++i) v[i] *= s;
}

void divide(double* v, double d, std::size_t n) {
  const float64x2_t vd = vdupq_n_f64(d);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(v + i, vdivq_f64(vld1q_f64(v + i), vd));
  for (; i < n; ++i) v[i] /= d;
}

void primal_step(const double* x, const double* g, const double* z, double alpha, double r,
                 double* out, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  const float64x2_t vr = vdupq_n_f64(r);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t vx = vld1q_f64(x + i);
    float64x2_t t = vmulq_f64(vr, vsubq_f64(vx, vld1q_f64(z + i)));
    t = vmulq_f64(va, vaddq_f64(vld1q_f64(g + i), t));
    vst1q_f64(out + i, vsubq_f64(vx, t));
  }
  for (; i < n; ++i) out[i] = x[i] - alpha * (g[i] + r * (x[i] - z[i]));
}

void relax(double* z, const double* x, double beta, std::size_t n) {
  const float64x2_t vb = vdupq_n_f64(beta);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t vz = vld1q_f64(z + i);
    vst1q_f64(z + i, vaddq_f64(vz, vmulq_f64(vb, vsubq_f64(vld1q_f64(x + i), vz))));
  }
  for (; i < n; ++i) z[i] += beta * (x[i] - z[i]);
}

void clamp(const double* v, const double* lo, const double* hi, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t vv = vld1q_f64(v + i);
    const float64x2_t vl = vld1q_f64(lo + i);
    const float64x2_t vh = vld1q_f64(hi + i);
    const float64x2_t t = vbslq_f64(vcgtq_f64(vv, vl), vv, vl);
    vst1q_f64(out + i, vbslq_f64(vcltq_f64(t, vh), t, vh));
  }
  for (; i < n; ++i) {
    const double t = v[i] > lo[i] ? v[i] : lo[i];
    out[i] = t < hi[i] ? t : hi[i];
  }
}

double dot(const double* a, const double* b, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  double s = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sq_dist(const double* a, const double* b, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t d = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
    acc = vaddq_f64(acc, vmulq_f64(d, d));
  }
  double s = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

const KernelTable kNeonTable{Isa::neon,  add,   add_diff, axpy, scale, divide,
                             primal_step, relax, clamp,    dot,  sq_dist};

}  // namespace

const KernelTable* neon_table() { return &kNeonTable; }

}  // namespace sgda::kernels::detail

#else

namespace sgda::kernels::detail {
const KernelTable* neon_table() { return nullptr; }
}  // namespace sgda::kernels::detail

#endif
