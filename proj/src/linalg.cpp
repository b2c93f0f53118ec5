#include "genlab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "genlab/common.hpp"

namespace genlab {

void jacobi_eigh(const std::vector<double>& sym, std::size_t d,
                 std::vector<double>& values, std::vector<double>* vectors) {
  if (sym.size() != d * d) throw ContractError("jacobi_eigh: bad matrix size");
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j)
      if (std::fabs(sym[i * d + j] - sym[j * d + i]) >
          1e-9 * (1.0 + std::fabs(sym[i * d + j])))
        throw ContractError("jacobi_eigh: matrix is not symmetric");

  std::vector<double> a = sym;
  std::vector<double> vt;  // accumulated rotations, row-major (V^T rows)
  if (vectors) {
    vt.assign(d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i) vt[i * d + i] = 1.0;
  }

  const int max_sweeps = 64;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = i + 1; j < d; ++j) off += a[i * d + j] * a[i * d + j];
    if (off <= 1e-26 * static_cast<double>(d * d)) break;
    for (std::size_t p = 0; p < d; ++p) {
      for (std::size_t q = p + 1; q < d; ++q) {
        const double apq = a[p * d + q];
        if (apq == 0.0) continue;
        const double app = a[p * d + p], aqq = a[q * d + q];
        const double tau = (aqq - app) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                         (std::fabs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (std::size_t k = 0; k < d; ++k) {
          const double akp = a[k * d + p], akq = a[k * d + q];
          a[k * d + p] = c * akp - s * akq;
          a[k * d + q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < d; ++k) {
          const double apk = a[p * d + k], aqk = a[q * d + k];
          a[p * d + k] = c * apk - s * aqk;
          a[q * d + k] = s * apk + c * aqk;
        }
        if (vectors) {
          for (std::size_t k = 0; k < d; ++k) {
            const double vpk = vt[p * d + k], vqk = vt[q * d + k];
            vt[p * d + k] = c * vpk - s * vqk;
            vt[q * d + k] = s * vpk + c * vqk;
          }
        }
      }
    }
  }

  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&a, d](std::size_t x, std::size_t y) {
    return a[x * d + x] < a[y * d + y];
  });
  values.resize(d);
  if (vectors) vectors->resize(d * d);
  for (std::size_t i = 0; i < d; ++i) {
    values[i] = a[order[i] * d + order[i]];
    if (vectors)
      std::copy(vt.begin() + order[i] * d, vt.begin() + (order[i] + 1) * d,
                vectors->begin() + i * d);
  }
}

double top_singular_value(const double* a, std::size_t rows, std::size_t cols) {
  // Gram matrix over the smaller dimension keeps the Jacobi cost down.
  const bool use_cols = cols <= rows;
  const std::size_t d = use_cols ? cols : rows;
  std::vector<double> gram(d * d, 0.0);
  if (use_cols) {
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i; j < d; ++j)
          gram[i * d + j] += a[r * cols + i] * a[r * cols + j];
  } else {
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = i; j < d; ++j)
        for (std::size_t c = 0; c < cols; ++c)
          gram[i * d + j] += a[i * cols + c] * a[j * cols + c];
  }
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < i; ++j) gram[i * d + j] = gram[j * d + i];
  std::vector<double> values;
  jacobi_eigh(gram, d, values);
  const double top = values.empty() ? 0.0 : values.back();
  return top > 0.0 ? std::sqrt(top) : 0.0;
}

std::vector<double> matmul_square(const std::vector<double>& a,
                                  const std::vector<double>& b, std::size_t d) {
  if (a.size() != d * d || b.size() != d * d)
    throw ContractError("matmul_square: bad matrix size");
  std::vector<double> c(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t k = 0; k < d; ++k) {
      const double aik = a[i * d + k];
      for (std::size_t j = 0; j < d; ++j) c[i * d + j] += aik * b[k * d + j];
    }
  return c;
}

}  // namespace genlab
