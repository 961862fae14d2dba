#pragma once

// Dense vector kernels used on the hot path. Each kernel has a scalar
// reference implementation and, where the target supports it, an AVX2 or
// NEON variant. The variant is picked once at startup (overridable through
// the SGDA_KERNELS environment variable or force_isa()).
//
// Elementwise kernels are bit-identical across variants: they perform the
// same IEEE operations per lane and never fuse multiply-add. Reductions
// (dot, sq_dist) use a fixed lane layout per variant, so they are
// deterministic per configuration but may differ from the scalar sum in the
// last bits.

#include <cstddef>
#include <string_view>

namespace sgda::kernels {

enum class Isa { scalar, avx2, neon };

struct KernelTable {
  Isa isa;
  // acc[i] += v[i]
  void (*add)(double* acc, const double* v, std::size_t n);
  // acc[i] += a[i] - b[i]
  void (*add_diff)(double* acc, const double* a, const double* b, std::size_t n);
  // y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // v[i] *= s
  void (*scale)(double* v, double s, std::size_t n);
  // v[i] /= d
  void (*divide)(double* v, double d, std::size_t n);
  // out[i] = x[i] - alpha * (g[i] + r * (x[i] - z[i]))
  void (*primal_step)(const double* x, const double* g, const double* z, double alpha,
                      double r, double* out, std::size_t n);
  // z[i] += beta * (x[i] - z[i])
  void (*relax)(double* z, const double* x, double beta, std::size_t n);
  // out[i] = min(max(v[i], lo[i]), hi[i])
  void (*clamp)(const double* v, const double* lo, const double* hi, double* out,
                std::size_t n);
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sq_dist)(const double* a, const double* b, std::size_t n);
};

const KernelTable& scalar_table();
bool isa_available(Isa isa);
/// Table for a specific variant; throws std::invalid_argument if unavailable.
const KernelTable& table(Isa isa);
/// Currently selected table.
const KernelTable& active();
void force_isa(Isa isa);
std::string_view isa_name(Isa isa);

}  // namespace sgda::kernels
