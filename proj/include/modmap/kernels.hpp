#pragma once

#include <cstddef>

// Entrywise and reduction kernels used by the proximal operators and the
// solver loop. Every kernel has a scalar reference implementation and may
// have SIMD variants; the active set is chosen once at startup from CPU
// capabilities (override with MODMAP_KERNELS=scalar|avx2|auto).
//
// Entrywise kernels are bitwise-identical across backends: both TUs are
// built with -ffp-contract=off and the SIMD code uses no FMA, so each lane
// performs the same rounding sequence as the scalar loop. Reductions
// (sum_sq, sum_sq_diff) accumulate in a different order under SIMD and agree
// with the scalar reference only up to rounding.
namespace modmap::kernels {

enum class Backend { scalar, avx2 };

struct Kernels {
  const char* name;
  // dst[i] = sign(src[i]) * max(|src[i]| - t, 0)
  void (*soft_threshold)(const double* src, double* dst, std::size_t len, double t);
  // dst[i] = a * src[i] + b
  void (*affine)(const double* src, double* dst, std::size_t len, double a, double b);
  // dst[i] = a[i] * b[i]
  void (*mul)(const double* a, const double* b, double* dst, std::size_t len);
  // acc[i] += src[i] * src[i]
  void (*accumulate_sq)(const double* src, double* acc, std::size_t len);
  // dual[i] += rho * (u[i] - v[i])
  void (*dual_ascent)(double* dual, const double* u, const double* v, std::size_t len, double rho);
  // sum_i src[i]^2
  double (*sum_sq)(const double* src, std::size_t len);
  // sum_i (a[i] - b[i])^2
  double (*sum_sq_diff)(const double* a, const double* b, std::size_t len);
};

const Kernels& scalar_kernels();

// nullptr when the binary lacks AVX2 code or the CPU does not support it.
const Kernels* avx2_kernels();

// Active set: picked once (env override, else best available), swappable in
// tests. select() throws std::invalid_argument if the backend is unavailable.
const Kernels& active();
void select(Backend b);
Backend active_backend();

inline void soft_threshold(const double* src, double* dst, std::size_t len, double t) {
  active().soft_threshold(src, dst, len, t);
}
inline void affine(const double* src, double* dst, std::size_t len, double a, double b) {
  active().affine(src, dst, len, a, b);
}
inline void mul(const double* a, const double* b, double* dst, std::size_t len) {
  active().mul(a, b, dst, len);
}
inline void accumulate_sq(const double* src, double* acc, std::size_t len) {
  active().accumulate_sq(src, acc, len);
}
inline void dual_ascent(double* dual, const double* u, const double* v, std::size_t len,
                        double rho) {
  active().dual_ascent(dual, u, v, len, rho);
}
inline double sum_sq(const double* src, std::size_t len) { return active().sum_sq(src, len); }
inline double sum_sq_diff(const double* a, const double* b, std::size_t len) {
  return active().sum_sq_diff(a, b, len);
}

}  // namespace modmap::kernels
