#pragma once

#include <cstddef>

namespace genlab::kernels {

// Flat double-precision kernels behind every hot loop.  Two implementations
// exist: a scalar reference and an AVX2 variant.  Both are written so the
// floating-point operation order is identical lane-for-lane (no FMA, no
// reassociation; the kernel translation units are compiled with contraction
// off), which makes the backends bit-exchangeable: results match to the last
// bit and runtime selection cannot change any downstream number.
struct Ops {
  const char* name;

  // C[m x n] += A[m x k] * B[k x n], row-major.
  void (*matmul_acc)(const double* a, const double* b, double* c,
                     std::size_t m, std::size_t k, std::size_t n);

  // Elementwise over n entries.
  void (*add)(const double* x, const double* y, double* out, std::size_t n);
  void (*sub)(const double* x, const double* y, double* out, std::size_t n);
  void (*mul)(const double* x, const double* y, double* out, std::size_t n);
  void (*scale)(const double* x, double c, double* out, std::size_t n);
  // y += c * x.
  void (*axpy)(double c, const double* x, double* y, std::size_t n);

  // Leaky ReLU forward and gradient accumulation (gx += gy * slope(x)).
  void (*leaky_relu)(const double* x, double slope, double* out, std::size_t n);
  void (*leaky_relu_grad_acc)(const double* x, const double* gy, double slope,
                              double* gx, std::size_t n);

  // In-place Adam update.  inv_bc1/inv_bc2 are the precomputed bias
  // corrections 1/(1 - beta1^t) and 1/(1 - beta2^t).
  void (*adam_update)(double* w, const double* g, double* m, double* v,
                      std::size_t n, double lr, double beta1, double beta2,
                      double eps, double inv_bc1, double inv_bc2);

  // In-place SGD update: w -= lr * g.
  void (*sgd_update)(double* w, const double* g, double lr, std::size_t n);
};

// Scalar reference backend (always available).
const Ops& scalar_ops();

// AVX2 backend, or nullptr when the build or CPU does not support it.
const Ops* avx2_ops();

// Backend in use.  Chosen once: AVX2 when available, otherwise scalar.
// The GENLAB_KERNELS environment variable ("scalar" or "avx2") overrides
// the automatic choice; asking for avx2 on an unsupported CPU falls back
// to scalar.
const Ops& active_ops();

// Test hook: pin the backend (nullptr restores automatic selection).
void force_ops(const Ops* ops);

}  // namespace genlab::kernels
