// AVX2 kernel variants. This TU is compiled with -mavx2 (and -ffp-contract=off,
// like the scalar TU); nothing here may be called unless the running CPU
// reports AVX2. No FMA: each lane must round exactly like the scalar loop.

#include "modmap/kernels.hpp"

#if defined(MODMAP_HAVE_AVX2)

#include <immintrin.h>

#include <cmath>

namespace modmap::kernels {
namespace avx2 {
namespace {

constexpr std::size_t kLanes = 4;

inline __m256d abs_pd(__m256d v) {
  const __m256d mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
  return _mm256_and_pd(v, mask);
}

inline __m256d sign_bits_pd(__m256d v) {
  const __m256d mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x8000000000000000ULL));
  return _mm256_and_pd(v, mask);
}

inline double hsum_pd(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s2 = _mm_add_pd(lo, hi);
  const __m128d s1 = _mm_add_sd(s2, _mm_unpackhi_pd(s2, s2));
  return _mm_cvtsd_f64(s1);
}

}  // namespace

void soft_threshold(const double* src, double* dst, std::size_t len, double t) {
  const __m256d vt = _mm256_set1_pd(t);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + kLanes <= len; i += kLanes) {
    const __m256d v = _mm256_loadu_pd(src + i);
    const __m256d m = _mm256_max_pd(_mm256_sub_pd(abs_pd(v), vt), zero);
    _mm256_storeu_pd(dst + i, _mm256_or_pd(m, sign_bits_pd(v)));
  }
  for (; i < len; ++i) {
    const double v = src[i];
    dst[i] = std::copysign(std::max(std::abs(v) - t, 0.0), v);
  }
}

void affine(const double* src, double* dst, std::size_t len, double a, double b) {
  const __m256d va = _mm256_set1_pd(a);
  const __m256d vb = _mm256_set1_pd(b);
  std::size_t i = 0;
  for (; i + kLanes <= len; i += kLanes)
    _mm256_storeu_pd(dst + i, _mm256_add_pd(_mm256_mul_pd(va, _mm256_loadu_pd(src + i)), vb));
  for (; i < len; ++i) dst[i] = a * src[i] + b;
}

void mul(const double* a, const double* b, double* dst, std::size_t len) {
  std::size_t i = 0;
  for (; i + kLanes <= len; i += kLanes)
    _mm256_storeu_pd(dst + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < len; ++i) dst[i] = a[i] * b[i];
}

void accumulate_sq(const double* src, double* acc, std::size_t len) {
  std::size_t i = 0;
  for (; i + kLanes <= len; i += kLanes) {
    const __m256d v = _mm256_loadu_pd(src + i);
    _mm256_storeu_pd(acc + i, _mm256_add_pd(_mm256_loadu_pd(acc + i), _mm256_mul_pd(v, v)));
  }
  for (; i < len; ++i) acc[i] += src[i] * src[i];
}

void dual_ascent(double* dual, const double* u, const double* v, std::size_t len, double rho) {
  const __m256d vr = _mm256_set1_pd(rho);
  std::size_t i = 0;
  for (; i + kLanes <= len; i += kLanes) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(u + i), _mm256_loadu_pd(v + i));
    _mm256_storeu_pd(dual + i, _mm256_add_pd(_mm256_loadu_pd(dual + i), _mm256_mul_pd(vr, d)));
  }
  for (; i < len; ++i) dual[i] += rho * (u[i] - v[i]);
}

double sum_sq(const double* src, std::size_t len) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + kLanes <= len; i += kLanes) {
    const __m256d v = _mm256_loadu_pd(src + i);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(v, v));
  }
  double total = hsum_pd(acc);
  for (; i < len; ++i) total += src[i] * src[i];
  return total;
}

double sum_sq_diff(const double* a, const double* b, std::size_t len) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + kLanes <= len; i += kLanes) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
  }
  double total = hsum_pd(acc);
  for (; i < len; ++i) {
    const double d = a[i] - b[i];
    total += d * d;
  }
  return total;
}

}  // namespace avx2

const Kernels* avx2_kernels() {
  if (!__builtin_cpu_supports("avx2")) return nullptr;
  static const Kernels k{"avx2",
                         avx2::soft_threshold,
                         avx2::affine,
                         avx2::mul,
                         avx2::accumulate_sq,
                         avx2::dual_ascent,
                         avx2::sum_sq,
                         avx2::sum_sq_diff};
  return &k;
}

}  // namespace modmap::kernels

#else

namespace modmap::kernels {
const Kernels* avx2_kernels() { return nullptr; }
}  // namespace modmap::kernels

#endif
