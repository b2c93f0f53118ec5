// Scalar reference kernels.  This translation unit is compiled with
// floating-point contraction disabled so the AVX2 backend can reproduce the
// exact same rounding (see kernels_avx2.cpp).

#include <cmath>
#include <cstddef>

#include "genlab/kernels.hpp"

namespace genlab::kernels {
namespace {

// C += A * B with an i,k,j loop: the inner loop is an axpy over a row of B,
// so each output element accumulates its k terms in index order.  The AVX2
// variant vectorizes the j loop and therefore performs the identical
// mul-then-add sequence per element.
void matmul_acc(const double* a, const double* b, double* c, std::size_t m,
                std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      double aip = a[i * k + p];
      const double* bp = b + p * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += aip * bp[j];
    }
  }
}

void add(const double* x, const double* y, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] + y[i];
}

void sub(const double* x, const double* y, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] - y[i];
}

void mul(const double* x, const double* y, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] * y[i];
}

void scale(const double* x, double c, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = c * x[i];
}

void axpy(double c, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += c * x[i];
}

void leaky_relu(const double* x, double slope, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    out[i] = x[i] >= 0.0 ? x[i] : slope * x[i];
}

void leaky_relu_grad_acc(const double* x, const double* gy, double slope,
                         double* gx, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    gx[i] += x[i] >= 0.0 ? gy[i] : slope * gy[i];
}

void adam_update(double* w, const double* g, double* m, double* v,
                 std::size_t n, double lr, double beta1, double beta2,
                 double eps, double inv_bc1, double inv_bc2) {
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * (g[i] * g[i]);
    double mhat = m[i] * inv_bc1;
    double vhat = v[i] * inv_bc2;
    w[i] -= lr * (mhat / (std::sqrt(vhat) + eps));
  }
}

void sgd_update(double* w, const double* g, double lr, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) w[i] -= lr * g[i];
}

constexpr Ops kScalarOps = {
    .name = "scalar",
    .matmul_acc = matmul_acc,
    .add = add,
    .sub = sub,
    .mul = mul,
    .scale = scale,
    .axpy = axpy,
    .leaky_relu = leaky_relu,
    .leaky_relu_grad_acc = leaky_relu_grad_acc,
    .adam_update = adam_update,
    .sgd_update = sgd_update,
};

}  // namespace

const Ops& scalar_ops() { return kScalarOps; }

}  // namespace genlab::kernels
