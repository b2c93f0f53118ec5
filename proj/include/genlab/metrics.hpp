#pragma once

#include <cstdint>
#include <vector>

#include "genlab/data.hpp"
#include "genlab/nn.hpp"

namespace genlab {

enum class DiscRole { Original, Auxiliary, Independent };
enum class EvalSet { Train1, Train2, Test, Generator };

// Critic payoff E_real[f] - E_gen[f] on finite sample sets, with the
// standard error of the difference of means.
struct DivergenceEstimate {
  double value = 0.0;
  double standard_error = 0.0;
  double se_real = 0.0;  // real-side and generator-side components
  double se_gen = 0.0;
  std::size_t n_real = 0;
  std::size_t n_gen = 0;
  DiscRole role = DiscRole::Original;
  EvalSet eval_set = EvalSet::Train1;
};

// Critic outputs on every row of a sample matrix, eval mode, no gradients.
std::vector<double> critic_values(NetworkParams& critic, const Matrix& samples);

DivergenceEstimate estimate_divergence_values(const std::vector<double>& f_real,
                                              const std::vector<double>& f_gen);

DivergenceEstimate estimate_divergence(NetworkParams& critic,
                                       const Matrix& real, const Matrix& gen,
                                       DiscRole role, EvalSet eval_set);

// Underfitting signature: the training discriminator sits below an equally
// trained observer by more than `margin`.
bool underfitting_indicator(double l_original, double l_auxiliary,
                            double margin);

// Generator overfitting gap: divergence measured against the unseen twin
// training set minus divergence against the set the GAN trained on, both
// through the same critic.
double generator_gap(double l_on_train2, double l_on_train1);

struct GapReport {
  double generator_gap = 0.0;
  double generator_gap_se = 0.0;
  double discriminator_gap = 0.0;  // original critic, train1 minus test
  bool underfit = false;
};

// Sample mean and covariance (unbiased, ridge 1e-6 on the diagonal).
void fit_gaussian(const Matrix& samples, std::vector<double>& mean,
                  std::vector<double>& cov);

// Frechet distance between two Gaussians:
// |m1-m2|^2 + tr(c1 + c2 - 2 (c1 c2)^{1/2}), computed via the symmetric
// product s1^{1/2} c2 s1^{1/2}.  Eigenvalues below 1e-10 are treated as zero
// and the result is floored at zero.
double frechet_distance(const std::vector<double>& mean1,
                        const std::vector<double>& cov1,
                        const std::vector<double>& mean2,
                        const std::vector<double>& cov2);

struct EmbeddingSpec {
  enum class Kind { Identity, RandomProjection };
  Kind kind = Kind::Identity;
  std::size_t out_dim = 2;
  std::uint64_t seed = 0;
};

Matrix embed(const Matrix& samples, const EmbeddingSpec& spec);

// Frechet distance between Gaussian fits of two embedded sample sets.
double frechet_metric(const Matrix& a, const Matrix& b,
                      const EmbeddingSpec& spec);

// Spearman rank correlation with average ranks for ties.
double spearman_rho(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace genlab
