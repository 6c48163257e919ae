#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

// Data-parallel primitives behind the dense/sparse linear algebra: a scalar
// reference implementation plus SIMD variants picked once at startup from
// runtime CPU detection. All variants must agree with the scalar kernels to
// rounding (the equivalence suite in tests/test_kernels.cpp enforces this).

namespace honem::kernels {

struct Ops {
  const char* name;
  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // x[i] *= alpha
  void (*scal)(double alpha, double* x, std::size_t n);
  // sum_k vals[k] * x[idx[k]]  (gathered dot, the CSR row product)
  double (*sparse_dot)(const double* vals, const std::uint32_t* idx,
                       const double* x, std::size_t n);
};

const Ops& scalar_ops();

// Best SIMD variant this build supports on this machine, or null.
const Ops* simd_ops();

// Active kernel set. Defaults to the best available; HONEM_KERNELS=scalar
// (or avx2/neon) in the environment overrides, as does force().
const Ops& active();

// Select a backend by name: "auto", "scalar", "avx2", "neon".
// Throws std::invalid_argument for names not available on this machine.
void force(const std::string& name);

inline double dot(const double* a, const double* b, std::size_t n) {
  return active().dot(a, b, n);
}
inline void axpy(double alpha, const double* x, double* y, std::size_t n) {
  active().axpy(alpha, x, y, n);
}
inline void scal(double alpha, double* x, std::size_t n) {
  active().scal(alpha, x, n);
}
inline double sparse_dot(const double* vals, const std::uint32_t* idx,
                         const double* x, std::size_t n) {
  return active().sparse_dot(vals, idx, x, n);
}

}  // namespace honem::kernels
