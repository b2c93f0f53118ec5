#include "genlab/train.hpp"

#include <cmath>
#include <filesystem>

#include "genlab/checkpoint.hpp"
#include "genlab/rng.hpp"

namespace genlab {

namespace {

Tensor tensor_from_matrix(const Matrix& m) {
  return Tensor::matrix(m.rows, m.cols, m.values);
}

Tensor reduce(Tape& tape, const Tensor& t, LossReduction reduction) {
  return reduction == LossReduction::Mean ? tape.reduce_mean(t)
                                          : tape.reduce_sum(t);
}

constexpr ForwardOptions kTrainForward{.train = true};

}  // namespace

void GanConfig::validate() const {
  dataset.validate();
  if (splits.n_train1 != splits.n_train2)
    throw SpecError("gan config: training splits must be equal size");
  if (splits.n_train1 == 0 || splits.n_test == 0)
    throw SpecError("gan config: split sizes must be positive");
  if (latent_dim == 0) throw SpecError("gan config: latent_dim must be positive");
  if (gen_hidden.empty())
    throw SpecError("gan config: generator needs at least one hidden layer");
  if (total_steps < 0) throw SpecError("gan config: negative total_steps");
  if (batch_size < 2)
    throw SpecError("gan config: batch_size must be >= 2 (batchnorm)");
  if (batch_size > splits.n_train1)
    throw SpecError("gan config: batch_size exceeds the training split");
  if (eval_every <= 0) throw SpecError("gan config: eval_every must be positive");
  if (gen_eval_count < 2)
    throw SpecError("gan config: gen_eval_count must be >= 2");
  if (!(adam.lr > 0.0) || !std::isfinite(adam.lr))
    throw SpecError("gan config: learning rate must be positive and finite");
  // Builders validate hidden widths and the multiplier.
  generator_spec(latent_dim, dataset.dimension, gen_hidden);
  discriminator_spec(dataset.dimension, disc_width_multiplier);
}

double discriminator_update_step(NetworkParams& disc, AdamState& state,
                                 const Matrix& real_batch,
                                 const Matrix& fake_batch,
                                 LossReduction reduction) {
  Tape tape;
  Tensor f_real =
      forward(tape, disc, tensor_from_matrix(real_batch), kTrainForward);
  Tensor f_fake =
      forward(tape, disc, tensor_from_matrix(fake_batch), kTrainForward);
  Tensor diff =
      tape.sub(reduce(tape, f_fake, reduction), reduce(tape, f_real, reduction));
  Tensor loss = tape.softplus(diff);
  const double value = loss.item();
  if (!std::isfinite(value))
    throw TrainingAbort("discriminator loss is not finite", -1);
  auto params = disc.trainables();
  disc.zero_grads();
  tape.backward(loss);
  adam_step(params, state);
  return value;
}

double generator_update_step(NetworkParams& gen, NetworkParams& disc,
                             AdamState& gen_state, const Matrix& latent_batch,
                             LossReduction reduction) {
  Tape tape;
  Tensor x_fake =
      forward(tape, gen, tensor_from_matrix(latent_batch), kTrainForward);
  Tensor f_fake = forward(tape, disc, x_fake, kTrainForward);
  Tensor loss = tape.softplus(tape.negate(reduce(tape, f_fake, reduction)));
  const double value = loss.item();
  if (!std::isfinite(value))
    throw TrainingAbort("generator loss is not finite", -1);
  auto gen_params = gen.trainables();
  gen.zero_grads();
  disc.zero_grads();  // critic gradients from this pass are scratch
  tape.backward(loss);
  adam_step(gen_params, gen_state);
  return value;
}

Matrix generate_samples(NetworkParams& gen, const Matrix& latents,
                        bool train_mode) {
  Tape tape;
  NoGradScope guard(tape);
  Tensor out = forward(tape, gen, tensor_from_matrix(latents),
                       ForwardOptions{.train = train_mode});
  Matrix m(out.rows(), out.cols());
  m.values = out.data();
  return m;
}

TrainedBundle train_gan(const GanConfig& config) {
  config.validate();
  const std::uint64_t seed = config.master_seed;

  TrainedBundle bundle;
  bundle.config = config;
  bundle.data = make_splits(config.dataset, config.splits,
                            derive_seed(seed, seed_role::dataset));

  const std::size_t dim = config.dataset.dimension;
  bundle.generator =
      init_network(generator_spec(config.latent_dim, dim, config.gen_hidden),
                   derive_seed(seed, seed_role::generator_init));
  bundle.disc_original =
      init_network(discriminator_spec(dim, config.disc_width_multiplier),
                   derive_seed(seed, seed_role::discriminator_init));
  if (config.auxiliary_enabled)
    bundle.disc_auxiliary =
        init_network(discriminator_spec(dim, config.disc_width_multiplier),
                     derive_seed(seed, seed_role::auxiliary_init));

  AdamState gen_state = AdamState::init(bundle.generator.trainables(), config.adam);
  AdamState disc_state =
      AdamState::init(bundle.disc_original.trainables(), config.adam);
  AdamState aux_state =
      config.auxiliary_enabled
          ? AdamState::init(bundle.disc_auxiliary->trainables(), config.adam)
          : AdamState{};

  const LatentSampler latent_train{config.latent_dim,
                                   derive_seed(seed, seed_role::latent_train)};
  const LatentSampler latent_eval{config.latent_dim,
                                  derive_seed(seed, seed_role::latent_eval)};
  const Matrix eval_latents = latent_eval.sample(config.gen_eval_count, 0);
  const std::uint64_t batch_seed = derive_seed(seed, seed_role::batch);

  // Last evaluated state, for recovery checkpoints on abort.
  NetworkParams good_gen = bundle.generator.clone();
  NetworkParams good_disc = bundle.disc_original.clone();
  std::optional<NetworkParams> good_aux =
      config.auxiliary_enabled
          ? std::optional<NetworkParams>(bundle.disc_auxiliary->clone())
          : std::nullopt;
  long long good_step = 0;

  auto write_recovery = [&](long long at_step) {
    if (config.abort_checkpoint_dir.empty()) return;
    namespace fs = std::filesystem;
    fs::create_directories(config.abort_checkpoint_dir);
    const std::string base = config.abort_checkpoint_dir + "/";
    save_checkpoint(good_gen, {"generator", seed, good_step},
                    base + "last_good_generator.ckpt");
    save_checkpoint(good_disc, {"disc_original", seed, good_step},
                    base + "last_good_disc_original.ckpt");
    if (good_aux)
      save_checkpoint(*good_aux, {"disc_auxiliary", seed, good_step},
                      base + "last_good_disc_auxiliary.ckpt");
    (void)at_step;
  };

  auto snapshot_wanted = [&config](long long step) {
    for (long long s : config.snapshot_steps)
      if (s == step) return true;
    return false;
  };
  if (snapshot_wanted(0))
    bundle.generator_snapshots[0] = bundle.generator.state_vector();

  double loss_d = 0.0, loss_g = 0.0, loss_aux = 0.0;
  for (long long step = 1; step <= config.total_steps; ++step) {
    try {
      const Matrix real =
          sample_batch(bundle.data.train1, config.batch_size, batch_seed,
                       static_cast<std::uint64_t>(step));
      const Matrix z_d =
          latent_train.sample(config.batch_size, 2 * static_cast<std::uint64_t>(step));
      // Fake batch is detached: the critic update must not touch the
      // generator, so its samples enter as plain data.
      const Matrix fake = generate_samples(bundle.generator, z_d,
                                           /*train_mode=*/true);
      loss_d = discriminator_update_step(bundle.disc_original, disc_state, real,
                                         fake, config.loss_reduction);
      ++bundle.disc_updates;
      if (bundle.disc_auxiliary) {
        // Observer: identical batches and update rule, zero influence on the
        // generator's trajectory.
        loss_aux = discriminator_update_step(*bundle.disc_auxiliary, aux_state,
                                             real, fake, config.loss_reduction);
        ++bundle.aux_updates;
      }
      const Matrix z_g = latent_train.sample(
          config.batch_size, 2 * static_cast<std::uint64_t>(step) + 1);
      loss_g = generator_update_step(bundle.generator, bundle.disc_original,
                                     gen_state, z_g, config.loss_reduction);
      ++bundle.gen_updates;
    } catch (const TrainingAbort& e) {
      write_recovery(step);
      throw TrainingAbort(std::string(e.what()) + " (step " +
                              std::to_string(step) + ")",
                          step);
    }

    if (snapshot_wanted(step))
      bundle.generator_snapshots[step] = bundle.generator.state_vector();

    if (step % config.eval_every == 0) {
      const Matrix gen_eval =
          generate_samples(bundle.generator, eval_latents, false);
      EvalPoint point;
      point.step = step;
      point.loss_d = loss_d;
      point.loss_g = loss_g;
      point.loss_aux = loss_aux;
      point.orig_train1 =
          estimate_divergence(bundle.disc_original, bundle.data.train1,
                              gen_eval, DiscRole::Original, EvalSet::Train1);
      point.orig_test =
          estimate_divergence(bundle.disc_original, bundle.data.test, gen_eval,
                              DiscRole::Original, EvalSet::Test);
      if (bundle.disc_auxiliary) {
        point.aux_train1 =
            estimate_divergence(*bundle.disc_auxiliary, bundle.data.train1,
                                gen_eval, DiscRole::Auxiliary, EvalSet::Train1);
        point.aux_test =
            estimate_divergence(*bundle.disc_auxiliary, bundle.data.test,
                                gen_eval, DiscRole::Auxiliary, EvalSet::Test);
      }
      bundle.history.points.push_back(point);
      good_gen = bundle.generator.clone();
      good_disc = bundle.disc_original.clone();
      if (bundle.disc_auxiliary) good_aux = bundle.disc_auxiliary->clone();
      good_step = step;
    }
  }
  bundle.final_loss_d = loss_d;
  bundle.final_loss_g = loss_g;
  return bundle;
}

// ---------------------------------------------------------------------------
// Independent discriminator

Matrix GeneratorSource::sample(std::size_t n, std::uint64_t seed) const {
  const LatentSampler latents{latent_dim_, seed};
  return generate_samples(gen_, latents.sample(n, 0), false);
}

Matrix DistributionSource::sample(std::size_t n, std::uint64_t seed) const {
  return sample_distribution(spec_, n, seed);
}

void IndependentDiscConfig::validate() const {
  if (steps < 0) throw SpecError("independent disc: negative steps");
  if (batch_size == 0)
    throw SpecError("independent disc: batch_size must be positive");
  if (schedule.total_steps <= 0)
    throw SpecError("independent disc: schedule needs positive total_steps");
  if (!(schedule.base_lr >= schedule.floor_lr) || !(schedule.floor_lr >= 0.0))
    throw SpecError("independent disc: need base_lr >= floor_lr >= 0");
  discriminator_spec(2, width_multiplier);
}

namespace {

double critic_sgd_update(NetworkParams& critic, const Matrix& real_batch,
                         const Matrix& fake_batch, double lr,
                         LossReduction reduction) {
  Tape tape;
  Tensor f_real =
      forward(tape, critic, tensor_from_matrix(real_batch), kTrainForward);
  Tensor f_fake =
      forward(tape, critic, tensor_from_matrix(fake_batch), kTrainForward);
  Tensor diff =
      tape.sub(reduce(tape, f_fake, reduction), reduce(tape, f_real, reduction));
  Tensor loss = tape.softplus(diff);
  const double value = loss.item();
  if (!std::isfinite(value))
    throw TrainingAbort("independent critic loss is not finite", -1);
  auto params = critic.trainables();
  critic.zero_grads();
  tape.backward(loss);
  sgd_step(params, lr);
  return value;
}

}  // namespace

IndependentResult train_independent_discriminator(
    const SampleSource& gen_source, const DatasetSplit& split,
    const IndependentDiscConfig& config, const Matrix& gen_eval) {
  config.validate();
  const Matrix& real = config.train_split == TrainSplit::Train1
                           ? split.train1
                           : split.train2;
  if (real.rows == 0)
    throw ContractError("independent disc: empty training split");

  const std::uint64_t source_mark = gen_source.checksum();
  // Fixed generator training set, same size as the real split.
  const Matrix gen_train = gen_source.sample(
      real.rows, derive_seed(config.seed, seed_role::independent_gen_samples));
  if (gen_train.rows != real.rows || gen_train.cols != real.cols)
    throw ContractError("independent disc: generator sample set is " +
                        std::to_string(gen_train.rows) + "x" +
                        std::to_string(gen_train.cols) + ", expected " +
                        std::to_string(real.rows) + "x" +
                        std::to_string(real.cols));

  IndependentResult result;
  result.critic =
      init_network(discriminator_spec(real.cols, config.width_multiplier),
                   derive_seed(config.seed, seed_role::independent_init));

  const std::uint64_t real_seed =
      derive_seed(config.seed, seed_role::independent_batch, 1);
  const std::uint64_t fake_seed =
      derive_seed(config.seed, seed_role::independent_batch, 2);
  for (long long step = 0; step < config.steps; ++step) {
    const double lr = cosine_lr(config.schedule, step);
    const Matrix rb = sample_batch(real, config.batch_size, real_seed,
                                   static_cast<std::uint64_t>(step));
    const Matrix fb = sample_batch(gen_train, config.batch_size, fake_seed,
                                   static_cast<std::uint64_t>(step));
    try {
      critic_sgd_update(result.critic, rb, fb, lr, config.loss_reduction);
    } catch (const TrainingAbort& e) {
      throw TrainingAbort(std::string(e.what()) + " (step " +
                              std::to_string(step) + ")",
                          step);
    }
  }
  if (gen_source.checksum() != source_mark)
    throw ContractError(
        "independent disc: generator state changed during training");

  result.on_train1 = estimate_divergence(result.critic, split.train1, gen_eval,
                                         DiscRole::Independent, EvalSet::Train1);
  result.on_train2 = estimate_divergence(result.critic, split.train2, gen_eval,
                                         DiscRole::Independent, EvalSet::Train2);
  result.on_test = estimate_divergence(result.critic, split.test, gen_eval,
                                       DiscRole::Independent, EvalSet::Test);
  result.on_train_pair = estimate_divergence(
      result.critic, real, gen_train, DiscRole::Independent,
      config.train_split == TrainSplit::Train1 ? EvalSet::Train1
                                               : EvalSet::Train2);
  return result;
}

}  // namespace genlab
