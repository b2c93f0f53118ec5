#include "genlab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "genlab/linalg.hpp"
#include "genlab/rng.hpp"
#include "genlab/tensor.hpp"

namespace genlab {

namespace {

Tensor tensor_from_matrix(const Matrix& m) {
  return Tensor::matrix(m.rows, m.cols, m.values);
}

// Mean and unbiased variance of one critic output set.
void mean_var(const std::vector<double>& v, double& mean, double& var) {
  mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  var = 0.0;
  if (v.size() < 2) return;
  for (double x : v) var += (x - mean) * (x - mean);
  var /= static_cast<double>(v.size() - 1);
}

}  // namespace

std::vector<double> critic_values(NetworkParams& critic,
                                  const Matrix& samples) {
  if (samples.rows == 0) throw ContractError("critic_values: empty sample set");
  Tape tape;
  NoGradScope guard(tape);
  Tensor out = forward(tape, critic, tensor_from_matrix(samples),
                       ForwardOptions{.train = false});
  if (out.cols() != 1)
    throw ContractError("critic_values: critic output is not scalar");
  return out.data();
}

DivergenceEstimate estimate_divergence_values(const std::vector<double>& f_real,
                                              const std::vector<double>& f_gen) {
  if (f_real.empty() || f_gen.empty())
    throw ContractError("estimate_divergence: empty sample set");
  DivergenceEstimate est;
  est.n_real = f_real.size();
  est.n_gen = f_gen.size();
  double mr, vr, mg, vg;
  mean_var(f_real, mr, vr);
  mean_var(f_gen, mg, vg);
  est.value = mr - mg;
  est.se_real = std::sqrt(vr / static_cast<double>(est.n_real));
  est.se_gen = std::sqrt(vg / static_cast<double>(est.n_gen));
  est.standard_error =
      std::sqrt(est.se_real * est.se_real + est.se_gen * est.se_gen);
  return est;
}

DivergenceEstimate estimate_divergence(NetworkParams& critic,
                                       const Matrix& real, const Matrix& gen,
                                       DiscRole role, EvalSet eval_set) {
  DivergenceEstimate est = estimate_divergence_values(
      critic_values(critic, real), critic_values(critic, gen));
  est.role = role;
  est.eval_set = eval_set;
  return est;
}

bool underfitting_indicator(double l_original, double l_auxiliary,
                            double margin) {
  if (!(margin >= 0.0))
    throw ContractError("underfitting_indicator: margin must be >= 0");
  return l_original < l_auxiliary - margin;
}

double generator_gap(double l_on_train2, double l_on_train1) {
  return l_on_train2 - l_on_train1;
}

void fit_gaussian(const Matrix& samples, std::vector<double>& mean,
                  std::vector<double>& cov) {
  if (samples.rows == 0) throw ContractError("fit_gaussian: empty sample set");
  const std::size_t n = samples.rows, d = samples.cols;
  mean.assign(d, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c) mean[c] += samples.at(r, c);
  for (double& m : mean) m /= static_cast<double>(n);
  cov.assign(d * d, 0.0);
  if (n >= 2) {
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t i = 0; i < d; ++i) {
        const double ci = samples.at(r, i) - mean[i];
        for (std::size_t j = i; j < d; ++j)
          cov[i * d + j] += ci * (samples.at(r, j) - mean[j]);
      }
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = i; j < d; ++j) {
        cov[i * d + j] /= static_cast<double>(n - 1);
        cov[j * d + i] = cov[i * d + j];
      }
  }
  for (std::size_t i = 0; i < d; ++i) cov[i * d + i] += 1e-6;
}

double frechet_distance(const std::vector<double>& mean1,
                        const std::vector<double>& cov1,
                        const std::vector<double>& mean2,
                        const std::vector<double>& cov2) {
  const std::size_t d = mean1.size();
  if (mean2.size() != d || cov1.size() != d * d || cov2.size() != d * d)
    throw ContractError("frechet_distance: dimension mismatch");

  double mean_term = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double diff = mean1[i] - mean2[i];
    mean_term += diff * diff;
  }

  // s1^{1/2} via eigendecomposition (checks symmetry as a side effect).
  std::vector<double> values, vectors;
  jacobi_eigh(cov1, d, values, &vectors);
  std::vector<double> sqrt1(d * d, 0.0);
  for (std::size_t k = 0; k < d; ++k) {
    const double lam = values[k] < 1e-10 ? 0.0 : values[k];
    const double s = std::sqrt(lam);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j)
        sqrt1[i * d + j] += s * vectors[k * d + i] * vectors[k * d + j];
  }

  // Validates cov2's symmetry on the way in.
  std::vector<double> tmp_values;
  jacobi_eigh(cov2, d, tmp_values);

  std::vector<double> inner =
      matmul_square(matmul_square(sqrt1, cov2, d), sqrt1, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j) {
      const double s = 0.5 * (inner[i * d + j] + inner[j * d + i]);
      inner[i * d + j] = s;
      inner[j * d + i] = s;
    }
  jacobi_eigh(inner, d, values);

  double trace_term = 0.0;
  for (std::size_t i = 0; i < d; ++i)
    trace_term += cov1[i * d + i] + cov2[i * d + i];
  for (double lam : values)
    trace_term -= 2.0 * std::sqrt(lam < 1e-10 ? 0.0 : lam);

  const double dist = mean_term + trace_term;
  return dist > 0.0 ? dist : 0.0;
}

Matrix embed(const Matrix& samples, const EmbeddingSpec& spec) {
  if (spec.kind == EmbeddingSpec::Kind::Identity) return samples;
  if (spec.out_dim == 0)
    throw ContractError("embed: projection needs a positive out_dim");
  const std::size_t d = samples.cols, k = spec.out_dim;
  Rng rng(derive_seed(spec.seed, seed_role::embedding));
  std::vector<double> proj(d * k);
  const double scale = 1.0 / std::sqrt(static_cast<double>(k));
  for (double& p : proj) p = scale * rng.normal();
  Matrix out(samples.rows, k);
  for (std::size_t r = 0; r < samples.rows; ++r)
    for (std::size_t j = 0; j < k; ++j) {
      double acc = 0.0;
      for (std::size_t i = 0; i < d; ++i)
        acc += samples.at(r, i) * proj[i * k + j];
      out.at(r, j) = acc;
    }
  return out;
}

double frechet_metric(const Matrix& a, const Matrix& b,
                      const EmbeddingSpec& spec) {
  if (a.cols != b.cols)
    throw ContractError("frechet_metric: sample dimensions differ");
  const Matrix ea = embed(a, spec), eb = embed(b, spec);
  std::vector<double> ma, ca, mb, cb;
  fit_gaussian(ea, ma, ca);
  fit_gaussian(eb, mb, cb);
  return frechet_distance(ma, ca, mb, cb);
}

double spearman_rho(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size())
    throw ContractError("spearman_rho: length mismatch");
  const std::size_t n = x.size();
  if (n < 2) throw ContractError("spearman_rho: need at least two pairs");

  auto ranks = [n](const std::vector<double>& v) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&v](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(n);
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i;
      while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
      const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
      for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
      i = j + 1;
    }
    return r;
  };

  const std::vector<double> rx = ranks(x), ry = ranks(y);
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0)
    throw ContractError("spearman_rho: constant input has no rank ordering");
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace genlab
