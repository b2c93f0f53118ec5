// AVX2 kernels.  Compiled with -mavx2 -mno-fma and contraction off: every
// lane performs the same multiply-then-add sequence as the scalar reference,
// so outputs are bit-identical (IEEE add/mul/div/sqrt are exactly rounded and
// the accumulation order per element is unchanged).

#include "genlab/kernels.hpp"

#if defined(__AVX2__)

#include <immintrin.h>

#include <cmath>
#include <cstddef>

namespace genlab::kernels {
namespace {

void matmul_acc(const double* a, const double* b, double* c, std::size_t m,
                std::size_t k, std::size_t n) {
  const std::size_t nv = n - n % 4;
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a[i * k + p];
      const double* bp = b + p * n;
      const __m256d va = _mm256_set1_pd(aip);
      std::size_t j = 0;
      for (; j < nv; j += 4) {
        __m256d vc = _mm256_loadu_pd(ci + j);
        __m256d vb = _mm256_loadu_pd(bp + j);
        vc = _mm256_add_pd(vc, _mm256_mul_pd(va, vb));
        _mm256_storeu_pd(ci + j, vc);
      }
      for (; j < n; ++j) ci[j] += aip * bp[j];
    }
  }
}

void add(const double* x, const double* y, double* out, std::size_t n) {
  const std::size_t nv = n - n % 4;
  std::size_t i = 0;
  for (; i < nv; i += 4)
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(x + i),
                                            _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) out[i] = x[i] + y[i];
}

void sub(const double* x, const double* y, double* out, std::size_t n) {
  const std::size_t nv = n - n % 4;
  std::size_t i = 0;
  for (; i < nv; i += 4)
    _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_loadu_pd(x + i),
                                            _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) out[i] = x[i] - y[i];
}

void mul(const double* x, const double* y, double* out, std::size_t n) {
  const std::size_t nv = n - n % 4;
  std::size_t i = 0;
  for (; i < nv; i += 4)
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(x + i),
                                            _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) out[i] = x[i] * y[i];
}

void scale(const double* x, double c, double* out, std::size_t n) {
  const __m256d vc = _mm256_set1_pd(c);
  const std::size_t nv = n - n % 4;
  std::size_t i = 0;
  for (; i < nv; i += 4)
    _mm256_storeu_pd(out + i, _mm256_mul_pd(vc, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) out[i] = c * x[i];
}

void axpy(double c, const double* x, double* y, std::size_t n) {
  const __m256d vc = _mm256_set1_pd(c);
  const std::size_t nv = n - n % 4;
  std::size_t i = 0;
  for (; i < nv; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    vy = _mm256_add_pd(vy, _mm256_mul_pd(vc, _mm256_loadu_pd(x + i)));
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += c * x[i];
}

void leaky_relu(const double* x, double slope, double* out, std::size_t n) {
  const __m256d vs = _mm256_set1_pd(slope);
  const __m256d zero = _mm256_setzero_pd();
  const std::size_t nv = n - n % 4;
  std::size_t i = 0;
  for (; i < nv; i += 4) {
    __m256d vx = _mm256_loadu_pd(x + i);
    __m256d ge = _mm256_cmp_pd(vx, zero, _CMP_GE_OQ);
    _mm256_storeu_pd(out + i,
                     _mm256_blendv_pd(_mm256_mul_pd(vs, vx), vx, ge));
  }
  for (; i < n; ++i) out[i] = x[i] >= 0.0 ? x[i] : slope * x[i];
}

void leaky_relu_grad_acc(const double* x, const double* gy, double slope,
                         double* gx, std::size_t n) {
  const __m256d vs = _mm256_set1_pd(slope);
  const __m256d zero = _mm256_setzero_pd();
  const std::size_t nv = n - n % 4;
  std::size_t i = 0;
  for (; i < nv; i += 4) {
    __m256d vx = _mm256_loadu_pd(x + i);
    __m256d vg = _mm256_loadu_pd(gy + i);
    __m256d ge = _mm256_cmp_pd(vx, zero, _CMP_GE_OQ);
    __m256d d = _mm256_blendv_pd(_mm256_mul_pd(vs, vg), vg, ge);
    _mm256_storeu_pd(gx + i, _mm256_add_pd(_mm256_loadu_pd(gx + i), d));
  }
  for (; i < n; ++i) gx[i] += x[i] >= 0.0 ? gy[i] : slope * gy[i];
}

void adam_update(double* w, const double* g, double* m, double* v,
                 std::size_t n, double lr, double beta1, double beta2,
                 double eps, double inv_bc1, double inv_bc2) {
  const __m256d vb1 = _mm256_set1_pd(beta1);
  const __m256d vb2 = _mm256_set1_pd(beta2);
  const __m256d vomb1 = _mm256_set1_pd(1.0 - beta1);
  const __m256d vomb2 = _mm256_set1_pd(1.0 - beta2);
  const __m256d vlr = _mm256_set1_pd(lr);
  const __m256d veps = _mm256_set1_pd(eps);
  const __m256d vib1 = _mm256_set1_pd(inv_bc1);
  const __m256d vib2 = _mm256_set1_pd(inv_bc2);
  const std::size_t nv = n - n % 4;
  std::size_t i = 0;
  for (; i < nv; i += 4) {
    __m256d vg = _mm256_loadu_pd(g + i);
    __m256d vm = _mm256_add_pd(_mm256_mul_pd(vb1, _mm256_loadu_pd(m + i)),
                               _mm256_mul_pd(vomb1, vg));
    __m256d vv = _mm256_add_pd(_mm256_mul_pd(vb2, _mm256_loadu_pd(v + i)),
                               _mm256_mul_pd(vomb2, _mm256_mul_pd(vg, vg)));
    _mm256_storeu_pd(m + i, vm);
    _mm256_storeu_pd(v + i, vv);
    __m256d mhat = _mm256_mul_pd(vm, vib1);
    __m256d vhat = _mm256_mul_pd(vv, vib2);
    __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(vhat), veps);
    __m256d step = _mm256_mul_pd(vlr, _mm256_div_pd(mhat, denom));
    _mm256_storeu_pd(w + i, _mm256_sub_pd(_mm256_loadu_pd(w + i), step));
  }
  for (; i < n; ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * (g[i] * g[i]);
    double mhat = m[i] * inv_bc1;
    double vhat = v[i] * inv_bc2;
    w[i] -= lr * (mhat / (std::sqrt(vhat) + eps));
  }
}

void sgd_update(double* w, const double* g, double lr, std::size_t n) {
  const __m256d vlr = _mm256_set1_pd(lr);
  const std::size_t nv = n - n % 4;
  std::size_t i = 0;
  for (; i < nv; i += 4) {
    __m256d vw = _mm256_loadu_pd(w + i);
    vw = _mm256_sub_pd(vw, _mm256_mul_pd(vlr, _mm256_loadu_pd(g + i)));
    _mm256_storeu_pd(w + i, vw);
  }
  for (; i < n; ++i) w[i] -= lr * g[i];
}

constexpr Ops kAvx2Ops = {
    .name = "avx2",
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

const Ops* avx2_ops_compiled() { return &kAvx2Ops; }

}  // namespace genlab::kernels

#else  // !__AVX2__

namespace genlab::kernels {
const Ops* avx2_ops_compiled() { return nullptr; }
}  // namespace genlab::kernels

#endif
