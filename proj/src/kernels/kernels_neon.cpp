// NEON kernel variants for aarch64 builds. NEON is baseline on aarch64, so
// there is no runtime feature probe beyond compiling on that architecture.

#include "honem/kernels.hpp"

#ifdef HONEM_HAVE_NEON_KERNELS

#include <arm_neon.h>

namespace honem::kernels {

namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  for (; i + 2 <= n; i += 2)
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
  double acc = vaddvq_f64(acc0) + vaddvq_f64(acc1);
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void scal_neon(double alpha, double* x, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(x + i, vmulq_f64(va, vld1q_f64(x + i)));
  for (; i < n; ++i) x[i] *= alpha;
}

double sparse_dot_neon(const double* vals, const std::uint32_t* idx,
                       const double* x, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t gathered = {x[idx[i]], x[idx[i + 1]]};
    acc = vfmaq_f64(acc, vld1q_f64(vals + i), gathered);
  }
  double out = vaddvq_f64(acc);
  for (; i < n; ++i) out += vals[i] * x[idx[i]];
  return out;
}

constexpr Ops kNeon{"neon", dot_neon, axpy_neon, scal_neon, sparse_dot_neon};

}  // namespace

const Ops* simd_ops() { return &kNeon; }

}  // namespace honem::kernels

#endif  // HONEM_HAVE_NEON_KERNELS
