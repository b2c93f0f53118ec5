#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "genlab/checkpoint.hpp"
#include "genlab/rng.hpp"
#include "genlab/train.hpp"

using namespace genlab;

namespace {

// Critic with no hidden layers computing f(x) = x0 exactly; a unit weight
// row has spectral norm 1, so normalization is the identity.
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

GanConfig tiny_config() {
  GanConfig cfg;
  cfg.dataset.radius = 0.75;
  cfg.dataset.component_sigma = 0.03;
  cfg.splits = {256, 256, 128};
  cfg.latent_dim = 4;
  cfg.gen_hidden = {8, 8};
  cfg.disc_width_multiplier = 4;
  cfg.total_steps = 40;
  cfg.batch_size = 16;
  cfg.eval_every = 20;
  cfg.gen_eval_count = 64;
  cfg.master_seed = 7;
  return cfg;
}

DistributionSpec ring_spec() {
  DistributionSpec d;
  d.radius = 0.75;
  d.component_sigma = 0.03;
  return d;
}

}  // namespace

TEST_CASE("gan config validation catches bad setups") {
  GanConfig cfg = tiny_config();
  CHECK_NOTHROW(cfg.validate());

  cfg.splits.n_train2 = 100;
  CHECK_THROWS_AS(cfg.validate(), SpecError);
  cfg = tiny_config();
  cfg.batch_size = 1;  // batchnorm needs two rows
  CHECK_THROWS_AS(cfg.validate(), SpecError);
  cfg = tiny_config();
  cfg.batch_size = 10000;
  CHECK_THROWS_AS(cfg.validate(), SpecError);
  cfg = tiny_config();
  cfg.disc_width_multiplier = 5;
  CHECK_THROWS_AS(cfg.validate(), SpecError);
  cfg = tiny_config();
  cfg.adam.lr = 0.0;
  CHECK_THROWS_AS(cfg.validate(), SpecError);
  cfg = tiny_config();
  cfg.eval_every = 0;
  CHECK_THROWS_AS(cfg.validate(), SpecError);
}

TEST_CASE("discriminator loss reproduces hand-computed values") {
  NetworkParams critic = slope_critic();
  AdamConfig frozen;
  frozen.lr = 1e-300;  // effectively observe-only
  auto params = critic.trainables();
  AdamState state = AdamState::init(params, frozen);

  const Matrix real = column0({4.0, 4.0});
  const Matrix fake = column0({2.0, 2.0});

  // Mean reduction: softplus(2 - 4).
  const double ld =
      discriminator_update_step(critic, state, real, fake, LossReduction::Mean);
  CHECK(ld == doctest::Approx(std::log1p(std::exp(-2.0))).epsilon(1e-12));

  // Sum reduction: softplus(4 - 8).
  critic = slope_critic();
  auto params2 = critic.trainables();
  AdamState state2 = AdamState::init(params2, frozen);
  const double ls =
      discriminator_update_step(critic, state2, real, fake, LossReduction::Sum);
  CHECK(ls == doctest::Approx(std::log1p(std::exp(-4.0))).epsilon(1e-12));

  // Identical batches: softplus(0) = ln 2 to double precision.
  critic = slope_critic();
  auto params3 = critic.trainables();
  AdamState state3 = AdamState::init(params3, frozen);
  const double l0 =
      discriminator_update_step(critic, state3, real, real, LossReduction::Mean);
  CHECK(l0 == doctest::Approx(std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("discriminator update trains only the critic") {
  GanConfig cfg = tiny_config();
  NetworkParams disc =
      init_network(discriminator_spec(2, 4), 11);
  auto params = disc.trainables();
  AdamState state = AdamState::init(params, cfg.adam);

  const Matrix real = column0({0.5, 0.7, 0.6});
  const Matrix fake = column0({-0.5, -0.7, -0.6});
  const auto before = disc.state_vector();
  const double loss =
      discriminator_update_step(disc, state, real, fake, LossReduction::Mean);
  CHECK(std::isfinite(loss));
  CHECK(disc.state_vector() != before);
  CHECK(state.step == 1);
}

TEST_CASE("generator update leaves critic parameters fixed") {
  NetworkParams gen = init_network(generator_spec(4, 2, {8, 8}), 3);
  NetworkParams disc = init_network(discriminator_spec(2, 4), 4);
  AdamConfig cfg;
  auto gen_params = gen.trainables();
  AdamState gen_state = AdamState::init(gen_params, cfg);

  // Trainable values of the critic must be bit-identical afterwards (its
  // power-iteration state may advance; that is forward-pass bookkeeping).
  std::vector<std::vector<double>> disc_before;
  for (auto& [name, p] : disc.trainables()) disc_before.push_back(p.data());
  const auto gen_before = gen.state_vector();

  Matrix z(6, 4);
  for (std::size_t i = 0; i < z.values.size(); ++i)
    z.values[i] = 0.1 * static_cast<double>(i % 7) - 0.3;
  const double loss =
      generator_update_step(gen, disc, gen_state, z, LossReduction::Mean);
  CHECK(std::isfinite(loss));
  CHECK(gen.state_vector() != gen_before);

  std::size_t i = 0;
  for (auto& [name, p] : disc.trainables()) {
    CHECK(p.data() == disc_before[i]);
    ++i;
  }
}

TEST_CASE("generated samples are deterministic in the latents") {
  NetworkParams gen = init_network(generator_spec(4, 2, {8}), 19);
  LatentSampler latents{4, 55};
  const Matrix z = latents.sample(32, 0);
  const Matrix a = generate_samples(gen, z);
  const Matrix b = generate_samples(gen, z);
  CHECK(a.values == b.values);
  CHECK(a.rows == 32);
  CHECK(a.cols == 2);
}

TEST_CASE("training is reproducible and counts its updates") {
  const GanConfig cfg = tiny_config();
  TrainedBundle a = train_gan(cfg);
  TrainedBundle b = train_gan(cfg);

  CHECK(a.generator.state_vector() == b.generator.state_vector());
  CHECK(a.disc_original.state_vector() == b.disc_original.state_vector());
  REQUIRE(a.disc_auxiliary.has_value());
  CHECK(a.disc_auxiliary->state_vector() == b.disc_auxiliary->state_vector());

  CHECK(a.gen_updates == cfg.total_steps);
  CHECK(a.disc_updates == cfg.total_steps);
  CHECK(a.aux_updates == cfg.total_steps);
  CHECK(a.final_loss_d == b.final_loss_d);
  CHECK(a.final_loss_g == b.final_loss_g);

  // Two eval points at steps 20 and 40 with populated estimates.
  REQUIRE(a.history.points.size() == 2);
  CHECK(a.history.points[0].step == 20);
  CHECK(a.history.points[1].step == 40);
  CHECK(a.history.points[0].orig_train1.n_real == 256);
  CHECK(a.history.points[0].orig_train1.n_gen == 64);
  CHECK(a.history.points[0].aux_train1.role == DiscRole::Auxiliary);
  CHECK(std::isfinite(a.history.points[1].orig_test.value));
}

TEST_CASE("different master seeds give different runs") {
  GanConfig cfg = tiny_config();
  TrainedBundle a = train_gan(cfg);
  cfg.master_seed = 8;
  TrainedBundle b = train_gan(cfg);
  CHECK(a.generator.state_vector() != b.generator.state_vector());
}

TEST_CASE("auxiliary critic never influences the generator") {
  GanConfig with_aux = tiny_config();
  with_aux.total_steps = 60;
  with_aux.snapshot_steps = {10, 30, 60};
  GanConfig without_aux = with_aux;
  without_aux.auxiliary_enabled = false;

  TrainedBundle a = train_gan(with_aux);
  TrainedBundle b = train_gan(without_aux);

  REQUIRE(a.generator_snapshots.size() == 3);
  REQUIRE(b.generator_snapshots.size() == 3);
  for (long long step : {10LL, 30LL, 60LL}) {
    CHECK(a.generator_snapshots.at(step) == b.generator_snapshots.at(step));
  }
  CHECK(a.generator.state_vector() == b.generator.state_vector());
  CHECK(a.disc_original.state_vector() == b.disc_original.state_vector());
  CHECK(a.aux_updates == 60);
  CHECK(b.aux_updates == 0);
  CHECK_FALSE(b.disc_auxiliary.has_value());
}

TEST_CASE("training aborts on exploding losses and leaves recovery state") {
  namespace fs = std::filesystem;
  const std::string dir =
      (fs::temp_directory_path() / "genlab_abort_test").string();
  fs::remove_all(dir);

  GanConfig cfg = tiny_config();
  cfg.adam.lr = 1e308;  // guarantees overflow within a couple of steps
  cfg.eval_every = 1;   // recovery state exists from step 1 on
  cfg.total_steps = 10;
  cfg.abort_checkpoint_dir = dir;

  bool aborted = false;
  try {
    train_gan(cfg);
  } catch (const TrainingAbort& e) {
    aborted = true;
    CHECK(e.step >= 1);
    CHECK(std::string(e.what()).find("step") != std::string::npos);
  }
  CHECK(aborted);

  CheckpointMeta meta;
  NetworkParams rescued =
      load_checkpoint(dir + "/last_good_generator.ckpt", &meta);
  CHECK(meta.label == "generator");
  CHECK(meta.step < 10);  // the state from before the blow-up, not the end
  CHECK(rescued.spec.role == Role::Generator);
  CHECK(fs::exists(dir + "/last_good_disc_original.ckpt"));
  CHECK(fs::exists(dir + "/last_good_disc_auxiliary.ckpt"));
  fs::remove_all(dir);
}

TEST_CASE("untrained critics report divergence within noise") {
  // Random critics on two sample sets from the same distribution: the payoff
  // must stay within a few standard errors of zero.
  const DistributionSpec dist = ring_spec();
  for (std::uint64_t rep = 0; rep < 10; ++rep) {
    const Matrix a = sample_distribution(dist, 512, derive_seed(100, rep));
    const Matrix b = sample_distribution(dist, 512, derive_seed(200, rep));
    NetworkParams critic =
        init_network(discriminator_spec(2, 16), derive_seed(300, rep));
    const DivergenceEstimate est = estimate_divergence(
        critic, a, b, DiscRole::Original, EvalSet::Test);
    CHECK(std::fabs(est.value) < 3.0 * est.standard_error);
  }
}

TEST_CASE("independent critic on the true distribution finds no divergence") {
  const DistributionSpec dist = ring_spec();
  const DatasetSplit split = make_splits(dist, {512, 512, 512}, 91);
  DistributionSource source(dist);
  const Matrix gen_eval = source.sample(512, derive_seed(91, 4096));

  IndependentDiscConfig cfg;
  cfg.width_multiplier = 4;
  cfg.steps = 300;
  cfg.batch_size = 32;
  cfg.schedule = {0.01, 300, 0.0};
  cfg.seed = 17;

  const IndependentResult res =
      train_independent_discriminator(source, split, cfg, gen_eval);
  // Both sides of the test estimate are held out: pure noise.
  CHECK(std::fabs(res.on_test.value) < 4.0 * res.on_test.standard_error);
  CHECK(res.on_test.n_real == 512);
  CHECK(res.on_test.n_gen == 512);
  CHECK(res.on_train_pair.role == DiscRole::Independent);
}

TEST_CASE("independent critic is reproducible and split-selectable") {
  const DistributionSpec dist = ring_spec();
  const DatasetSplit split = make_splits(dist, {256, 256, 128}, 13);
  DistributionSource source(dist);
  const Matrix gen_eval = source.sample(256, 999);

  IndependentDiscConfig cfg;
  cfg.width_multiplier = 4;
  cfg.steps = 50;
  cfg.batch_size = 16;
  cfg.schedule = {0.01, 50, 0.0};
  cfg.seed = 23;

  const IndependentResult a =
      train_independent_discriminator(source, split, cfg, gen_eval);
  const IndependentResult b =
      train_independent_discriminator(source, split, cfg, gen_eval);
  CHECK(a.critic.state_vector() == b.critic.state_vector());
  CHECK(a.on_train1.value == b.on_train1.value);

  cfg.train_split = TrainSplit::Train2;
  const IndependentResult c =
      train_independent_discriminator(source, split, cfg, gen_eval);
  CHECK(c.critic.state_vector() != a.critic.state_vector());
}

TEST_CASE("generator sources sample without mutating the generator") {
  NetworkParams gen = init_network(generator_spec(4, 2, {8}), 5);
  GeneratorSource source(gen, 4);
  const std::uint64_t before = source.checksum();
  const Matrix s1 = source.sample(64, 42);
  const Matrix s2 = source.sample(64, 42);
  CHECK(source.checksum() == before);
  CHECK(s1.values == s2.values);
  CHECK(s1.rows == 64);
  CHECK(s1.cols == 2);
  for (double v : s1.values) {
    CHECK(v >= -1.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("independent training works against a live generator") {
  const DistributionSpec dist = ring_spec();
  const DatasetSplit split = make_splits(dist, {128, 128, 64}, 31);
  NetworkParams gen = init_network(generator_spec(4, 2, {8}), 6);
  GeneratorSource source(gen, 4);
  const Matrix gen_eval = source.sample(128, 77);

  IndependentDiscConfig cfg;
  cfg.width_multiplier = 4;
  cfg.steps = 40;
  cfg.batch_size = 16;
  cfg.schedule = {0.01, 40, 0.0};
  cfg.seed = 3;

  const IndependentResult res =
      train_independent_discriminator(source, split, cfg, gen_eval);
  // An untrained generator is nothing like the ring: the trained critic
  // must find positive divergence on the pair it optimized.
  CHECK(res.on_train_pair.value > 0.0);
  CHECK(std::isfinite(res.on_train1.value));
}
