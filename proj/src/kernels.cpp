#include "modmap/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace modmap::kernels {

namespace scalar {

void soft_threshold(const double* src, double* dst, std::size_t len, double t) {
  for (std::size_t i = 0; i < len; ++i) {
    const double v = src[i];
    const double m = std::abs(v) - t;
    dst[i] = std::copysign(std::max(m, 0.0), v);
  }
}

void affine(const double* src, double* dst, std::size_t len, double a, double b) {
  for (std::size_t i = 0; i < len; ++i) dst[i] = a * src[i] + b;
}

void mul(const double* a, const double* b, double* dst, std::size_t len) {
  for (std::size_t i = 0; i < len; ++i) dst[i] = a[i] * b[i];
}

void accumulate_sq(const double* src, double* acc, std::size_t len) {
  for (std::size_t i = 0; i < len; ++i) acc[i] += src[i] * src[i];
}

void dual_ascent(double* dual, const double* u, const double* v, std::size_t len, double rho) {
  for (std::size_t i = 0; i < len; ++i) dual[i] += rho * (u[i] - v[i]);
}

double sum_sq(const double* src, std::size_t len) {
  double acc = 0.0;
  for (std::size_t i = 0; i < len; ++i) acc += src[i] * src[i];
  return acc;
}

double sum_sq_diff(const double* a, const double* b, std::size_t len) {
  double acc = 0.0;
  for (std::size_t i = 0; i < len; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

}  // namespace scalar

const Kernels& scalar_kernels() {
  static const Kernels k{"scalar",
                         scalar::soft_threshold,
                         scalar::affine,
                         scalar::mul,
                         scalar::accumulate_sq,
                         scalar::dual_ascent,
                         scalar::sum_sq,
                         scalar::sum_sq_diff};
  return k;
}

namespace {

const Kernels* pick_default() {
  if (const char* env = std::getenv("MODMAP_KERNELS")) {
    const std::string v(env);
    if (v == "scalar") return &scalar_kernels();
    if (v == "avx2") {
      if (const Kernels* k = avx2_kernels()) return k;
      throw std::invalid_argument("MODMAP_KERNELS=avx2 but AVX2 kernels are unavailable");
    }
    if (!v.empty() && v != "auto")
      throw std::invalid_argument("MODMAP_KERNELS must be scalar, avx2, or auto");
  }
  if (const Kernels* k = avx2_kernels()) return k;
  return &scalar_kernels();
}

const Kernels*& active_slot() {
  static const Kernels* slot = pick_default();
  return slot;
}

}  // namespace

const Kernels& active() { return *active_slot(); }

void select(Backend b) {
  switch (b) {
    case Backend::scalar:
      active_slot() = &scalar_kernels();
      return;
    case Backend::avx2:
      if (const Kernels* k = avx2_kernels()) {
        active_slot() = k;
        return;
      }
      throw std::invalid_argument("AVX2 kernels are unavailable on this machine");
  }
  throw std::invalid_argument("unknown kernel backend");
}

Backend active_backend() {
  return active_slot() == &scalar_kernels() ? Backend::scalar : Backend::avx2;
}

}  // namespace modmap::kernels
