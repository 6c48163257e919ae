#include "honem/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>

namespace honem::kernels {

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scal_scalar(double alpha, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

double sparse_dot_scalar(const double* vals, const std::uint32_t* idx,
                         const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += vals[i] * x[idx[i]];
  return acc;
}

constexpr Ops kScalar{"scalar", dot_scalar, axpy_scalar, scal_scalar,
                      sparse_dot_scalar};

const Ops* pick_default() {
  if (const char* env = std::getenv("HONEM_KERNELS")) {
    std::string name(env);
    if (name == "scalar") return &kScalar;
    if (const Ops* simd = simd_ops(); simd && name == simd->name) return simd;
    // Unknown or unavailable name in the environment: fall through to auto.
  }
  if (const Ops* simd = simd_ops()) return simd;
  return &kScalar;
}

std::atomic<const Ops*> g_active{nullptr};

}  // namespace

const Ops& scalar_ops() { return kScalar; }

#if !defined(HONEM_HAVE_AVX2_KERNELS) && !defined(HONEM_HAVE_NEON_KERNELS)
const Ops* simd_ops() { return nullptr; }
#endif

const Ops& active() {
  const Ops* ops = g_active.load(std::memory_order_acquire);
  if (!ops) {
    ops = pick_default();
    g_active.store(ops, std::memory_order_release);
  }
  return *ops;
}

void force(const std::string& name) {
  if (name == "auto") {
    g_active.store(pick_default(), std::memory_order_release);
    return;
  }
  if (name == "scalar") {
    g_active.store(&kScalar, std::memory_order_release);
    return;
  }
  if (const Ops* simd = simd_ops(); simd && name == simd->name) {
    g_active.store(simd, std::memory_order_release);
    return;
  }
  throw std::invalid_argument("kernel backend '" + name +
                              "' not available on this machine");
}

}  // namespace honem::kernels
