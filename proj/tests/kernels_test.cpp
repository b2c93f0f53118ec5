#include "doctest.h"

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "genlab/kernels.hpp"
#include "genlab/rng.hpp"

using namespace genlab;
using kernels::Ops;

namespace {

std::vector<double> random_vec(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

bool bits_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

// Textbook i,j,k matmul with a local accumulator; summation order differs
// from the kernels, so comparisons use a tolerance.
void matmul_naive(const double* a, const double* b, double* c, std::size_t m,
                  std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += a[i * k + p] * b[p * n + j];
      c[i * n + j] += acc;
    }
}

}  // namespace

TEST_CASE("scalar matmul_acc matches a naive oracle and accumulates") {
  const Ops& ops = kernels::scalar_ops();
  for (std::uint64_t trial = 0; trial < 20; ++trial) {
    Rng rng(1000 + trial);
    const std::size_t m = 1 + rng.index(6), k = 1 + rng.index(6),
                      n = 1 + rng.index(6);
    const auto a = random_vec(m * k, 2 * trial);
    const auto b = random_vec(k * n, 2 * trial + 1);
    std::vector<double> c(m * n, 0.25), want = c;
    ops.matmul_acc(a.data(), b.data(), c.data(), m, k, n);
    matmul_naive(a.data(), b.data(), want.data(), m, k, n);
    for (std::size_t i = 0; i < c.size(); ++i)
      CHECK(c[i] == doctest::Approx(want[i]).epsilon(1e-13));
  }
}

TEST_CASE("scalar elementwise kernels match direct formulas") {
  const Ops& ops = kernels::scalar_ops();
  const auto x = random_vec(37, 7);
  const auto y = random_vec(37, 8);
  std::vector<double> out(37);

  ops.add(x.data(), y.data(), out.data(), 37);
  for (std::size_t i = 0; i < 37; ++i) CHECK(out[i] == x[i] + y[i]);
  ops.sub(x.data(), y.data(), out.data(), 37);
  for (std::size_t i = 0; i < 37; ++i) CHECK(out[i] == x[i] - y[i]);
  ops.mul(x.data(), y.data(), out.data(), 37);
  for (std::size_t i = 0; i < 37; ++i) CHECK(out[i] == x[i] * y[i]);
  ops.scale(x.data(), -1.75, out.data(), 37);
  for (std::size_t i = 0; i < 37; ++i) CHECK(out[i] == x[i] * -1.75);

  std::vector<double> acc = y;
  ops.axpy(0.5, x.data(), acc.data(), 37);
  for (std::size_t i = 0; i < 37; ++i) CHECK(acc[i] == y[i] + 0.5 * x[i]);
}

TEST_CASE("leaky relu forward and gradient accumulation") {
  const Ops& ops = kernels::scalar_ops();
  const std::vector<double> x{-2.0, -0.5, 0.0, 0.5, 3.0};
  std::vector<double> out(5);
  ops.leaky_relu(x.data(), 0.2, out.data(), 5);
  CHECK(out[0] == -0.4);
  CHECK(out[1] == -0.1);
  CHECK(out[2] == 0.0);
  CHECK(out[3] == 0.5);
  CHECK(out[4] == 3.0);

  const std::vector<double> gy{1.0, 1.0, 1.0, 1.0, 1.0};
  std::vector<double> gx(5, 10.0);  // pre-existing gradient must be kept
  ops.leaky_relu_grad_acc(x.data(), gy.data(), 0.2, gx.data(), 5);
  CHECK(gx[0] == 10.2);
  CHECK(gx[1] == 10.2);
  CHECK(gx[2] == 11.0);  // x >= 0 takes the unit-slope branch
  CHECK(gx[3] == 11.0);
  CHECK(gx[4] == 11.0);
}

TEST_CASE("scalar adam_update matches the closed-form update") {
  const Ops& ops = kernels::scalar_ops();
  std::vector<double> w{1.0, -2.0, 0.5};
  std::vector<double> g{0.3, -0.7, 0.0};
  std::vector<double> m{0.1, 0.0, 0.2};
  std::vector<double> v{0.01, 0.0, 0.04};
  const double lr = 1e-3, b1 = 0.5, b2 = 0.999, eps = 1e-8;
  const double ibc1 = 1.0 / (1.0 - 0.25), ibc2 = 1.0 / (1.0 - 0.998001);

  auto w0 = w;
  auto m0 = m;
  auto v0 = v;
  ops.adam_update(w.data(), g.data(), m.data(), v.data(), 3, lr, b1, b2, eps,
                  ibc1, ibc2);
  for (std::size_t i = 0; i < 3; ++i) {
    const double em = b1 * m0[i] + (1.0 - b1) * g[i];
    const double ev = b2 * v0[i] + (1.0 - b2) * (g[i] * g[i]);
    const double ew = w0[i] - lr * (em * ibc1) / (std::sqrt(ev * ibc2) + eps);
    CHECK(m[i] == em);
    CHECK(v[i] == ev);
    CHECK(w[i] == ew);
  }
}

TEST_CASE("sgd_update subtracts lr times gradient exactly") {
  const Ops& ops = kernels::scalar_ops();
  std::vector<double> w{1.0, -1.0, 0.25};
  const std::vector<double> g{2.0, 4.0, -8.0};
  ops.sgd_update(w.data(), g.data(), 0.125, 3);
  CHECK(w[0] == 0.75);
  CHECK(w[1] == -1.5);
  CHECK(w[2] == 1.25);
}

TEST_CASE("avx2 backend is bit-identical to scalar") {
  const Ops* avx = kernels::avx2_ops();
  if (!avx) {
    MESSAGE("avx2 not available on this CPU; skipping");
    return;
  }
  const Ops& sc = kernels::scalar_ops();

  // Sizes straddle the 4-lane vector width to cover the remainder loops.
  for (std::size_t n : {1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 64, 129}) {
    const auto x = random_vec(n, 100 + n);
    const auto y = random_vec(n, 200 + n);
    const auto g = random_vec(n, 300 + n);
    std::vector<double> o1(n), o2(n);

    sc.add(x.data(), y.data(), o1.data(), n);
    avx->add(x.data(), y.data(), o2.data(), n);
    CHECK(bits_equal(o1, o2));
    sc.sub(x.data(), y.data(), o1.data(), n);
    avx->sub(x.data(), y.data(), o2.data(), n);
    CHECK(bits_equal(o1, o2));
    sc.mul(x.data(), y.data(), o1.data(), n);
    avx->mul(x.data(), y.data(), o2.data(), n);
    CHECK(bits_equal(o1, o2));
    sc.scale(x.data(), 1.0 / 3.0, o1.data(), n);
    avx->scale(x.data(), 1.0 / 3.0, o2.data(), n);
    CHECK(bits_equal(o1, o2));

    std::vector<double> a1 = y, a2 = y;
    sc.axpy(-2.5, x.data(), a1.data(), n);
    avx->axpy(-2.5, x.data(), a2.data(), n);
    CHECK(bits_equal(a1, a2));

    sc.leaky_relu(x.data(), 0.2, o1.data(), n);
    avx->leaky_relu(x.data(), 0.2, o2.data(), n);
    CHECK(bits_equal(o1, o2));

    std::vector<double> g1(n, 0.5), g2(n, 0.5);
    sc.leaky_relu_grad_acc(x.data(), y.data(), 0.2, g1.data(), n);
    avx->leaky_relu_grad_acc(x.data(), y.data(), 0.2, g2.data(), n);
    CHECK(bits_equal(g1, g2));

    std::vector<double> w1 = x, w2 = x, m1 = y, m2 = y;
    std::vector<double> v1(n, 0.125), v2(n, 0.125);
    sc.adam_update(w1.data(), g.data(), m1.data(), v1.data(), n, 1e-3, 0.5,
                   0.999, 1e-8, 4.0 / 3.0, 500.25);
    avx->adam_update(w2.data(), g.data(), m2.data(), v2.data(), n, 1e-3, 0.5,
                     0.999, 1e-8, 4.0 / 3.0, 500.25);
    CHECK(bits_equal(w1, w2));
    CHECK(bits_equal(m1, m2));
    CHECK(bits_equal(v1, v2));

    std::vector<double> s1 = x, s2 = x;
    sc.sgd_update(s1.data(), g.data(), 0.01, n);
    avx->sgd_update(s2.data(), g.data(), 0.01, n);
    CHECK(bits_equal(s1, s2));
  }

  // Matmul across shapes with every remainder class in n.
  for (std::size_t m : {1, 2, 5}) {
    for (std::size_t k : {1, 3, 8}) {
      for (std::size_t n : {1, 3, 4, 6, 11, 16}) {
        const auto a = random_vec(m * k, 11 * m + k);
        const auto b = random_vec(k * n, 13 * k + n);
        std::vector<double> c1(m * n, 0.1), c2(m * n, 0.1);
        sc.matmul_acc(a.data(), b.data(), c1.data(), m, k, n);
        avx->matmul_acc(a.data(), b.data(), c2.data(), m, k, n);
        CHECK(bits_equal(c1, c2));
      }
    }
  }
}

TEST_CASE("force_ops pins the active backend") {
  const Ops& sc = kernels::scalar_ops();
  kernels::force_ops(&sc);
  CHECK(std::string(kernels::active_ops().name) == "scalar");
  kernels::force_ops(nullptr);  // restore automatic selection
  const Ops* avx = kernels::avx2_ops();
  if (avx) {
    kernels::force_ops(avx);
    CHECK(std::string(kernels::active_ops().name) == "avx2");
    kernels::force_ops(nullptr);
  }
}
