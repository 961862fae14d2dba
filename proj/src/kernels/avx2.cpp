#include "kernels_impl.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>

#define SGDA_AVX2 __attribute__((target("avx2")))

namespace sgda::kernels::detail {

namespace {

SGDA_AVX2 void add(double* acc, const double* v, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d a = _mm256_loadu_pd(acc + i);
    _mm256_storeu_pd(acc + i, _mm256_add_pd(a, _mm256_loadu_pd(v + i)));
  }
  for (; i < n; ++i) acc[i] += v[i];
}

SGDA_AVX2 void add_diff(double* acc, const double* a, const double* b, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    _mm256_storeu_pd(acc + i, _mm256_add_pd(_mm256_loadu_pd(acc + i), d));
  }
  for (; i < n; ++i) acc[i] += a[i] - b[i];
}

SGDA_AVX2 void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d p = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), p));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

SGDA_AVX2 void scale(double* v, double s, std::size_t n) {
  const __m256d vs = _mm256_set1_pd(s);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(v + i, _mm256_mul_pd(_mm256_loadu_pd(v + i), vs));
  for (; i < n; ++i) v[i] *= s;
}

SGDA_AVX2 void divide(double* v, double d, std::size_t n) {
  const __m256d vd = _mm256_set1_pd(d);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(v + i, _mm256_div_pd(_mm256_loadu_pd(v + i), vd));
  for (; i < n; ++i) v[i] /= d;
}

SGDA_AVX2 void primal_step(const double* x, const double* g, const double* z, double alpha,
                           double r, double* out, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  const __m256d vr = _mm256_set1_pd(r);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vx = _mm256_loadu_pd(x + i);
    __m256d t = _mm256_mul_pd(vr, _mm256_sub_pd(vx, _mm256_loadu_pd(z + i)));
    t = _mm256_mul_pd(va, _mm256_add_pd(_mm256_loadu_pd(g + i), t));
    _mm256_storeu_pd(out + i, _mm256_sub_pd(vx, t));
  }
  for (; i < n; ++i) out[i] = x[i] - alpha * (g[i] + r * (x[i] - z[i]));
}

SGDA_AVX2 void relax(double* z, const double* x, double beta, std::size_t n) {
  const __m256d vb = _mm256_set1_pd(beta);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vz = _mm256_loadu_pd(z + i);
    __m256d t = _mm256_mul_pd(vb, _mm256_sub_pd(_mm256_loadu_pd(x + i), vz));
    _mm256_storeu_pd(z + i, _mm256_add_pd(vz, t));
  }
  for (; i < n; ++i) z[i] += beta * (x[i] - z[i]);
}

SGDA_AVX2 void clamp(const double* v, const double* lo, const double* hi, double* out,
                     std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d t = _mm256_max_pd(_mm256_loadu_pd(v + i), _mm256_loadu_pd(lo + i));
    _mm256_storeu_pd(out + i, _mm256_min_pd(t, _mm256_loadu_pd(hi + i)));
  }
  for (; i < n; ++i) {
    const double t = v[i] > lo[i] ? v[i] : lo[i];
    out[i] = t < hi[i] ? t : hi[i];
  }
}

SGDA_AVX2 double hsum(__m256d v) {
  alignas(32) double lane[4];
  _mm256_store_pd(lane, v);
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

SGDA_AVX2 double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  double s = hsum(acc);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

SGDA_AVX2 double sq_dist(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

const KernelTable kAvx2Table{Isa::avx2,  add,   add_diff, axpy, scale, divide,
                             primal_step, relax, clamp,    dot,  sq_dist};

}  // namespace

const KernelTable* avx2_table() {
  return __builtin_cpu_supports("avx2") ? &kAvx2Table : nullptr;
}

}  // namespace sgda::kernels::detail

#else

namespace sgda::kernels::detail {
const KernelTable* avx2_table() { return nullptr; }
}  // namespace sgda::kernels::detail

#endif
