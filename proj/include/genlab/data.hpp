#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "genlab/common.hpp"

namespace genlab {

// Plain row-major sample matrix: rows are samples, cols are coordinates.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}

  double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  const double* row(std::size_t r) const { return values.data() + r * cols; }
  bool all_finite() const;
};

enum class DistKind { GaussianRing, Checkerboard, Spiral };

// Two-dimensional synthetic distributions.
struct DistributionSpec {
  DistKind kind = DistKind::GaussianRing;
  std::size_t dimension = 2;

  // gaussian_ring: `components` isotropic Gaussians with sd `component_sigma`
  // spaced uniformly on a circle of radius `radius`, equal weights.
  std::size_t components = 8;
  double radius = 2.0;
  double component_sigma = 0.02;

  // checkerboard: uniform over the dark cells of a `cells` x `cells` board
  // covering [-1, 1]^2.
  std::size_t cells = 4;

  // spiral: `arms` interleaved Archimedean arcs with isotropic noise.
  std::size_t arms = 2;
  double noise = 0.05;

  void validate() const;  // throws SpecError
};

Matrix sample_distribution(const DistributionSpec& spec, std::size_t n,
                           std::uint64_t seed);

struct SplitSizes {
  std::size_t n_train1 = 2048;
  std::size_t n_train2 = 2048;
  std::size_t n_test = 1024;
};

// Two equal-size training sets plus a test set, drawn from disjoint
// substreams of one seed.  n_train1 must equal n_train2.
struct DatasetSplit {
  Matrix train1;
  Matrix train2;
  Matrix test;
  SplitSizes sizes;
  std::uint64_t seed = 0;
};

DatasetSplit make_splits(const DistributionSpec& spec, const SplitSizes& sizes,
                         std::uint64_t seed);

// Deterministic with-replacement minibatch: row indices depend only on
// (seed, step).
Matrix sample_batch(const Matrix& data, std::size_t batch_size,
                    std::uint64_t seed, std::uint64_t step);

// I.i.d. standard-normal latent draws; a (seed, salt) pair pins the matrix.
struct LatentSampler {
  std::size_t latent_dim = 16;
  std::uint64_t seed = 0;

  Matrix sample(std::size_t n, std::uint64_t salt) const;
};

// Comma-separated export with an x0..x{d-1} header, 9 significant digits.
void write_matrix_csv(const Matrix& m, const std::string& path);

}  // namespace genlab
