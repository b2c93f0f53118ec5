#pragma once

#include <cstddef>
#include <vector>

namespace genlab {

// Eigendecomposition of a symmetric d x d matrix (row-major) by cyclic
// Jacobi rotations.  Outputs ascending eigenvalues and, when requested,
// eigenvectors as rows of `vectors` (vectors[i] pairs with values[i]).
void jacobi_eigh(const std::vector<double>& sym, std::size_t d,
                 std::vector<double>& values,
                 std::vector<double>* vectors = nullptr);

// Largest singular value of a rows x cols row-major matrix, computed from the
// Gram matrix of the smaller side.  Independent of the power iteration, so it
// doubles as a cross-check for spectral normalization.
double top_singular_value(const double* a, std::size_t rows, std::size_t cols);

// c = a * b for small row-major d x d matrices.
std::vector<double> matmul_square(const std::vector<double>& a,
                                  const std::vector<double>& b, std::size_t d);

}  // namespace genlab
