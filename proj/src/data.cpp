#include "genlab/data.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "genlab/rng.hpp"

namespace genlab {

bool Matrix::all_finite() const {
  for (double v : values)
    if (!std::isfinite(v)) return false;
  return true;
}

void DistributionSpec::validate() const {
  if (dimension != 2)
    throw SpecError("distribution: only 2-D distributions are supported");
  switch (kind) {
    case DistKind::GaussianRing:
      if (components == 0)
        throw SpecError("gaussian_ring: components must be positive");
      if (!(radius >= 0.0) || !std::isfinite(radius))
        throw SpecError("gaussian_ring: radius must be finite and >= 0");
      if (!(component_sigma >= 0.0) || !std::isfinite(component_sigma))
        throw SpecError("gaussian_ring: sigma must be finite and >= 0");
      break;
    case DistKind::Checkerboard:
      if (cells < 2) throw SpecError("checkerboard: cells must be >= 2");
      break;
    case DistKind::Spiral:
      if (arms == 0) throw SpecError("spiral: arms must be positive");
      if (!(noise >= 0.0) || !std::isfinite(noise))
        throw SpecError("spiral: noise must be finite and >= 0");
      break;
  }
}

Matrix sample_distribution(const DistributionSpec& spec, std::size_t n,
                           std::uint64_t seed) {
  spec.validate();
  Rng rng(seed);
  Matrix out(n, 2);
  switch (spec.kind) {
    case DistKind::GaussianRing: {
      const double step = 2.0 * M_PI / static_cast<double>(spec.components);
      for (std::size_t r = 0; r < n; ++r) {
        const std::uint64_t c = rng.index(spec.components);
        const double angle = step * static_cast<double>(c);
        out.at(r, 0) = spec.radius * std::cos(angle) +
                       spec.component_sigma * rng.normal();
        out.at(r, 1) = spec.radius * std::sin(angle) +
                       spec.component_sigma * rng.normal();
      }
      break;
    }
    case DistKind::Checkerboard: {
      // Dark cells of the board over [-1, 1]^2, row-major enumeration.
      std::vector<std::pair<std::size_t, std::size_t>> dark;
      for (std::size_t i = 0; i < spec.cells; ++i)
        for (std::size_t j = 0; j < spec.cells; ++j)
          if ((i + j) % 2 == 0) dark.emplace_back(i, j);
      const double w = 2.0 / static_cast<double>(spec.cells);
      for (std::size_t r = 0; r < n; ++r) {
        const auto [i, j] = dark[rng.index(dark.size())];
        out.at(r, 0) = -1.0 + (static_cast<double>(j) + rng.uniform()) * w;
        out.at(r, 1) = -1.0 + (static_cast<double>(i) + rng.uniform()) * w;
      }
      break;
    }
    case DistKind::Spiral: {
      const double phase = 2.0 * M_PI / static_cast<double>(spec.arms);
      for (std::size_t r = 0; r < n; ++r) {
        const std::uint64_t arm = rng.index(spec.arms);
        const double t = rng.uniform();
        const double theta =
            3.5 * M_PI * t + phase * static_cast<double>(arm);
        out.at(r, 0) = t * std::cos(theta) + spec.noise * rng.normal();
        out.at(r, 1) = t * std::sin(theta) + spec.noise * rng.normal();
      }
      break;
    }
  }
  return out;
}

DatasetSplit make_splits(const DistributionSpec& spec, const SplitSizes& sizes,
                         std::uint64_t seed) {
  if (sizes.n_train1 != sizes.n_train2)
    throw ContractError("make_splits: training splits must be equal size, got " +
                        std::to_string(sizes.n_train1) + " and " +
                        std::to_string(sizes.n_train2));
  if (sizes.n_train1 == 0 || sizes.n_test == 0)
    throw ContractError("make_splits: split sizes must be positive");
  DatasetSplit split;
  split.sizes = sizes;
  split.seed = seed;
  split.train1 = sample_distribution(spec, sizes.n_train1,
                                     derive_seed(seed, seed_role::train1));
  split.train2 = sample_distribution(spec, sizes.n_train2,
                                     derive_seed(seed, seed_role::train2));
  split.test = sample_distribution(spec, sizes.n_test,
                                   derive_seed(seed, seed_role::test));
  return split;
}

Matrix sample_batch(const Matrix& data, std::size_t batch_size,
                    std::uint64_t seed, std::uint64_t step) {
  if (data.rows == 0) throw ContractError("sample_batch: empty data");
  if (batch_size == 0 || batch_size > data.rows)
    throw ContractError("sample_batch: batch size " +
                        std::to_string(batch_size) + " out of range for " +
                        std::to_string(data.rows) + " rows");
  Rng rng(derive_seed(seed, step));
  Matrix out(batch_size, data.cols);
  for (std::size_t r = 0; r < batch_size; ++r) {
    const std::uint64_t src = rng.index(data.rows);
    for (std::size_t c = 0; c < data.cols; ++c)
      out.at(r, c) = data.at(src, c);
  }
  return out;
}

Matrix LatentSampler::sample(std::size_t n, std::uint64_t salt) const {
  if (latent_dim == 0) throw ContractError("latent sampler: zero dimension");
  Rng rng(derive_seed(seed, salt));
  Matrix out(n, latent_dim);
  for (double& v : out.values) v = rng.normal();
  return out;
}

void write_matrix_csv(const Matrix& m, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw ContractError("cannot open " + path + " for writing");
  for (std::size_t c = 0; c < m.cols; ++c) {
    if (c) os << ',';
    os << 'x' << c;
  }
  os << '\n';
  char buf[40];
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (std::size_t c = 0; c < m.cols; ++c) {
      if (c) os << ',';
      std::snprintf(buf, sizeof buf, "%.9g", m.at(r, c));
      os << buf;
    }
    os << '\n';
  }
  if (!os) throw ContractError("failed writing " + path);
}

}  // namespace genlab
