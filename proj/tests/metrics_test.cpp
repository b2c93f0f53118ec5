#include "doctest.h"

#include <cmath>
#include <vector>

#include "genlab/linalg.hpp"
#include "genlab/metrics.hpp"
#include "genlab/rng.hpp"

#ifdef GENLAB_HAVE_EIGEN
#include <Eigen/Dense>
#include <Eigen/SVD>
#endif

using namespace genlab;

namespace {

// Critic with no hidden layers computing f(x) = x0; the unit weight row has
// spectral norm exactly 1, so normalization changes nothing.
NetworkParams slope_critic() {
  NetworkSpec spec;
  spec.role = Role::Discriminator;
  spec.input_dim = 2;
  spec.output_dim = 1;
  spec.spectral_norm = true;
  NetworkParams net = init_network(spec, 1);
  net.layers[0].W.data() = {1.0, 0.0};
  net.layers[0].b.data() = {0.0};
  net.layers[0].u = {1.0};
  return net;
}

Matrix column0(const std::vector<double>& xs) {
  Matrix m(xs.size(), 2);
  for (std::size_t i = 0; i < xs.size(); ++i) m.at(i, 0) = xs[i];
  return m;
}

// Random SPD matrix A = L L^T + eps I via a random lower-triangular factor.
std::vector<double> random_spd(std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> l(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j <= i; ++j) l[i * d + j] = rng.normal();
  std::vector<double> a(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < d; ++k) acc += l[i * d + k] * l[j * d + k];
      a[i * d + j] = acc + (i == j ? 0.05 : 0.0);
    }
  return a;
}

#ifdef GENLAB_HAVE_EIGEN
Eigen::MatrixXd to_eigen(const std::vector<double>& m, std::size_t d) {
  Eigen::MatrixXd out(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      out(static_cast<long>(i), static_cast<long>(j)) = m[i * d + j];
  return out;
}

double frechet_oracle(const std::vector<double>& m1,
                      const std::vector<double>& c1,
                      const std::vector<double>& m2,
                      const std::vector<double>& c2) {
  const std::size_t d = m1.size();
  Eigen::MatrixXd s1 = to_eigen(c1, d), s2 = to_eigen(c2, d);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es1(s1);
  const Eigen::MatrixXd root1 = es1.operatorSqrt();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> inner(root1 * s2 * root1);
  double tr_sqrt = 0.0;
  for (long i = 0; i < inner.eigenvalues().size(); ++i)
    tr_sqrt += std::sqrt(std::max(0.0, inner.eigenvalues()(i)));
  double mean2 = 0.0;
  for (std::size_t i = 0; i < d; ++i)
    mean2 += (m1[i] - m2[i]) * (m1[i] - m2[i]);
  return mean2 + s1.trace() + s2.trace() - 2.0 * tr_sqrt;
}
#endif

}  // namespace

TEST_CASE("divergence estimate on hand-computed values") {
  const DivergenceEstimate est =
      estimate_divergence_values({1.0, 2.0, 3.0}, {0.0, 1.0});
  CHECK(est.value == 1.5);  // means 2 and 0.5, all representable
  // Unbiased variances 1 and 0.5 over n 3 and 2.
  CHECK(est.se_real == doctest::Approx(std::sqrt(1.0 / 3.0)).epsilon(1e-14));
  CHECK(est.se_gen == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(est.standard_error ==
        doctest::Approx(std::sqrt(1.0 / 3.0 + 0.25)).epsilon(1e-14));
  CHECK(est.n_real == 3);
  CHECK(est.n_gen == 2);

  CHECK_THROWS_AS(estimate_divergence_values({}, {1.0}), ContractError);
  CHECK_THROWS_AS(estimate_divergence_values({1.0}, {}), ContractError);
}

TEST_CASE("divergence through a critic matches the direct average") {
  NetworkParams critic = slope_critic();
  const Matrix real = column0({4.0, 6.0});   // f values 4, 6
  const Matrix gen = column0({1.0, 1.0, 4.0});  // f values 1, 1, 4
  const DivergenceEstimate est = estimate_divergence(
      critic, real, gen, DiscRole::Independent, EvalSet::Test);
  CHECK(est.value == 3.0);  // 5 - 2
  CHECK(est.role == DiscRole::Independent);
  CHECK(est.eval_set == EvalSet::Test);
}

TEST_CASE("swapping the sample sets negates the estimate exactly") {
  NetworkParams critic = slope_critic();
  Rng rng(17);
  Matrix a(64, 2), b(64, 2);
  for (double& v : a.values) v = rng.normal();
  for (double& v : b.values) v = rng.normal();
  const double ab =
      estimate_divergence(critic, a, b, DiscRole::Original, EvalSet::Train1).value;
  const double ba =
      estimate_divergence(critic, b, a, DiscRole::Original, EvalSet::Train1).value;
  CHECK(ab == -ba);  // IEEE subtraction is exactly antisymmetric
}

TEST_CASE("divergence scales linearly with the critic outputs") {
  // Doubling every f value doubles the mean difference with no rounding
  // error when the inputs are dyadic.
  const DivergenceEstimate one =
      estimate_divergence_values({1.0, 0.5, 0.25, 0.5}, {0.25, 0.25});
  const DivergenceEstimate two =
      estimate_divergence_values({2.0, 1.0, 0.5, 1.0}, {0.5, 0.5});
  CHECK(two.value == 2.0 * one.value);
}

TEST_CASE("underfitting indicator compares against the margin") {
  CHECK(underfitting_indicator(0.1, 0.5, 0.2));        // 0.1 < 0.5 - 0.2
  CHECK_FALSE(underfitting_indicator(0.4, 0.5, 0.2));  // inside the margin
  CHECK_FALSE(underfitting_indicator(0.6, 0.5, 0.0));
  CHECK_THROWS_AS(underfitting_indicator(0.0, 0.0, -0.1), ContractError);
}

TEST_CASE("generator gap is the train2 minus train1 payoff") {
  CHECK(generator_gap(0.75, 0.5) == 0.25);
  CHECK(generator_gap(0.25, 0.5) == -0.25);
}

TEST_CASE("fit_gaussian on hand-computed points") {
  Matrix m(2, 2);
  m.at(0, 0) = 0.0;
  m.at(0, 1) = 0.0;
  m.at(1, 0) = 2.0;
  m.at(1, 1) = 2.0;
  std::vector<double> mean, cov;
  fit_gaussian(m, mean, cov);
  CHECK(mean == std::vector<double>{1.0, 1.0});
  CHECK(cov[0] == doctest::Approx(2.0 + 1e-6).epsilon(1e-12));
  CHECK(cov[1] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(cov[2] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(cov[3] == doctest::Approx(2.0 + 1e-6).epsilon(1e-12));

  // A single sample has no spread: the ridge is the whole covariance.
  Matrix single(1, 2);
  single.at(0, 0) = 5.0;
  fit_gaussian(single, mean, cov);
  CHECK(mean == std::vector<double>{5.0, 0.0});
  CHECK(cov == std::vector<double>{1e-6, 0.0, 0.0, 1e-6});

  Matrix empty(0, 2);
  CHECK_THROWS_AS(fit_gaussian(empty, mean, cov), ContractError);
}

TEST_CASE("frechet distance closed forms in one dimension") {
  // Same Gaussian; mean shift 3; variances 4 vs 1 (sd gap 1).
  CHECK(frechet_distance({0.0}, {1.0}, {0.0}, {1.0}) ==
        doctest::Approx(0.0).epsilon(1e-10).scale(1.0));
  CHECK(frechet_distance({0.0}, {1.0}, {3.0}, {1.0}) ==
        doctest::Approx(9.0).epsilon(1e-8));
  CHECK(frechet_distance({0.0}, {4.0}, {0.0}, {1.0}) ==
        doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("frechet distance closed forms in two dimensions") {
  const std::vector<double> eye{1, 0, 0, 1};
  CHECK(frechet_distance({0, 0}, eye, {3, 4}, eye) ==
        doctest::Approx(25.0).epsilon(1e-10));
  // I vs 4I: trace term 2 + 8 - 2 * tr(2I) = 2.
  CHECK(frechet_distance({0, 0}, eye, {0, 0}, {4, 0, 0, 4}) ==
        doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("frechet distance is symmetric and zero on self across SPD pairs") {
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    const auto c1 = random_spd(2, 1000 + trial);
    const auto c2 = random_spd(2, 2000 + trial);
    Rng rng(3000 + trial);
    const std::vector<double> m1{rng.normal(), rng.normal()};
    const std::vector<double> m2{rng.normal(), rng.normal()};
    const double ab = frechet_distance(m1, c1, m2, c2);
    const double ba = frechet_distance(m2, c2, m1, c1);
    CHECK(std::fabs(ab - ba) < 1e-9);
    CHECK(frechet_distance(m1, c1, m1, c1) ==
          doctest::Approx(0.0).epsilon(1e-9).scale(1.0));
    CHECK(ab >= 0.0);
  }
}

#ifdef GENLAB_HAVE_EIGEN
TEST_CASE("frechet distance matches an eigen-based oracle") {
  for (std::uint64_t trial = 0; trial < 50; ++trial) {
    for (std::size_t d : {1, 2, 3, 5}) {
      const auto c1 = random_spd(d, 41 * d + trial);
      const auto c2 = random_spd(d, 97 * d + trial);
      Rng rng(7 * d + trial);
      std::vector<double> m1(d), m2(d);
      for (double& v : m1) v = rng.normal();
      for (double& v : m2) v = rng.normal();
      const double mine = frechet_distance(m1, c1, m2, c2);
      const double want = frechet_oracle(m1, c1, m2, c2);
      CHECK(mine == doctest::Approx(want).epsilon(1e-8).scale(1.0));
    }
  }
}
#endif

TEST_CASE("frechet distance handles singular covariances") {
  // Rank-one covariance: sqrt of the symmetric product must not go NaN.
  const std::vector<double> flat{1.0, 1.0, 1.0, 1.0};
  const std::vector<double> eye{1, 0, 0, 1};
  const double v = frechet_distance({0, 0}, flat, {0, 0}, eye);
  CHECK(std::isfinite(v));
  CHECK(v >= 0.0);
}

TEST_CASE("frechet distance validates its inputs") {
  CHECK_THROWS_AS(frechet_distance({0.0}, {1.0}, {0.0, 0.0}, {1, 0, 0, 1}),
                  ContractError);
  const std::vector<double> asym{1.0, 0.5, -0.5, 1.0};
  CHECK_THROWS_AS(
      frechet_distance({0, 0}, asym, {0, 0}, {1, 0, 0, 1}), ContractError);
}

TEST_CASE("identity embedding passes samples through") {
  Matrix m(3, 2);
  Rng rng(4);
  for (double& v : m.values) v = rng.normal();
  const Matrix out = embed(m, {});
  CHECK(out.values == m.values);
}

TEST_CASE("random projection embedding is seeded and shaped") {
  Matrix m(50, 2);
  Rng rng(6);
  for (double& v : m.values) v = rng.normal();
  EmbeddingSpec spec;
  spec.kind = EmbeddingSpec::Kind::RandomProjection;
  spec.out_dim = 4;
  spec.seed = 123;
  const Matrix a = embed(m, spec);
  const Matrix b = embed(m, spec);
  CHECK(a.rows == 50);
  CHECK(a.cols == 4);
  CHECK(a.values == b.values);
  spec.seed = 124;
  CHECK(embed(m, spec).values != a.values);
}

TEST_CASE("frechet metric vanishes on identical sample sets") {
  Matrix m(200, 2);
  Rng rng(8);
  for (double& v : m.values) v = rng.normal();
  CHECK(frechet_metric(m, m, {}) == doctest::Approx(0.0).epsilon(1e-9).scale(1.0));
}

TEST_CASE("spearman rank correlation") {
  CHECK(spearman_rho({1, 2, 3, 4}, {10, 20, 30, 40}) == doctest::Approx(1.0));
  CHECK(spearman_rho({1, 2, 3, 4}, {5, 4, 3, 2}) == doctest::Approx(-1.0));
  // Monotone under any strictly increasing map.
  CHECK(spearman_rho({1, 5, 2, 8}, {0.1, 25.0, 4.0, 64.0}) ==
        doctest::Approx(1.0));
  // Tied pair gets the average rank 1.5.
  CHECK(spearman_rho({1, 1, 2}, {5, 7, 9}) ==
        doctest::Approx(1.5 / std::sqrt(3.0)).epsilon(1e-12));
  CHECK_THROWS_AS(spearman_rho({1, 2}, {1}), ContractError);
  CHECK_THROWS_AS(spearman_rho({3, 3, 3}, {1, 2, 3}), ContractError);
  CHECK_THROWS_AS(spearman_rho({1}, {1}), ContractError);
}

TEST_CASE("jacobi eigendecomposition on known matrices") {
  std::vector<double> values;
  std::vector<double> vectors;
  jacobi_eigh({2, 1, 1, 2}, 2, values, &vectors);
  CHECK(values[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(values[1] == doctest::Approx(3.0).epsilon(1e-12));
  // Eigenvector rows satisfy A v = lambda v.
  for (std::size_t e = 0; e < 2; ++e) {
    const double* v = &vectors[e * 2];
    const double av0 = 2 * v[0] + 1 * v[1];
    const double av1 = 1 * v[0] + 2 * v[1];
    CHECK(av0 == doctest::Approx(values[e] * v[0]).epsilon(1e-10).scale(1.0));
    CHECK(av1 == doctest::Approx(values[e] * v[1]).epsilon(1e-10).scale(1.0));
  }
  CHECK_THROWS_AS(jacobi_eigh({1, 2, 3, 4}, 2, values), ContractError);
  CHECK_THROWS_AS(jacobi_eigh({1, 2, 3}, 2, values), ContractError);
}

#ifdef GENLAB_HAVE_EIGEN
TEST_CASE("jacobi eigenvalues match eigen on random symmetric matrices") {
  for (std::uint64_t trial = 0; trial < 20; ++trial) {
    const std::size_t d = 2 + trial % 5;
    const auto a = random_spd(d, 555 + trial);
    std::vector<double> values;
    jacobi_eigh(a, d, values);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_eigen(a, d));
    for (std::size_t i = 0; i < d; ++i)
      CHECK(values[i] ==
            doctest::Approx(es.eigenvalues()(static_cast<long>(i)))
                .epsilon(1e-10)
                .scale(1.0));
  }
}

TEST_CASE("top singular value matches eigen's SVD") {
  for (std::uint64_t trial = 0; trial < 20; ++trial) {
    Rng rng(900 + trial);
    const std::size_t r = 1 + rng.index(6), c = 1 + rng.index(6);
    std::vector<double> a(r * c);
    for (double& v : a) v = rng.normal();
    Eigen::MatrixXd m(r, c);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j)
        m(static_cast<long>(i), static_cast<long>(j)) = a[i * c + j];
    const double want = m.jacobiSvd().singularValues()(0);
    CHECK(top_singular_value(a.data(), r, c) ==
          doctest::Approx(want).epsilon(1e-9).scale(1.0));
  }
}
#endif
