#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "genlab/data.hpp"
#include "genlab/metrics.hpp"
#include "genlab/nn.hpp"
#include "genlab/optim.hpp"

namespace genlab {

// How per-sample critic outputs enter the loss.  Mean keeps the losses on a
// per-sample scale regardless of batch size; Sum matches the raw minibatch
// formulation.  Reported divergences are always per-sample means.
enum class LossReduction { Mean, Sum };

struct GanConfig {
  DistributionSpec dataset;
  SplitSizes splits;
  std::size_t latent_dim = 16;
  std::vector<std::size_t> gen_hidden = {64, 64};
  std::size_t disc_width_multiplier = 16;

  long long total_steps = 20000;
  std::size_t batch_size = 64;
  AdamConfig adam;  // lr 1e-4, betas 0.5/0.999
  LossReduction loss_reduction = LossReduction::Mean;
  bool auxiliary_enabled = true;

  long long eval_every = 500;
  std::size_t gen_eval_count = 2048;  // generator samples per divergence eval

  std::uint64_t master_seed = 1;

  // Capture flattened generator parameters at these steps (bit-exactness
  // probes); empty in normal runs.
  std::vector<long long> snapshot_steps;
  // When set, a recovery checkpoint of the last evaluated state is written
  // here if training aborts on a non-finite loss.
  std::string abort_checkpoint_dir;

  void validate() const;
};

// Divergence trace recorded every eval_every steps.
struct EvalPoint {
  long long step = 0;
  double loss_d = 0.0;
  double loss_g = 0.0;
  double loss_aux = 0.0;
  DivergenceEstimate orig_train1, orig_test;
  DivergenceEstimate aux_train1, aux_test;
};

struct DivergenceReport {
  std::vector<EvalPoint> points;
};

struct TrainedBundle {
  GanConfig config;
  DatasetSplit data;
  NetworkParams generator;
  NetworkParams disc_original;
  std::optional<NetworkParams> disc_auxiliary;
  DivergenceReport history;
  long long gen_updates = 0;
  long long disc_updates = 0;
  long long aux_updates = 0;
  double final_loss_d = 0.0;
  double final_loss_g = 0.0;
  std::map<long long, std::vector<double>> generator_snapshots;
};

// One critic update on a fixed real/fake pair: builds
// softplus(red(f(fake)) - red(f(real))), backprops, applies Adam.  Returns
// the loss before the update.  Only `disc` is touched.
double discriminator_update_step(NetworkParams& disc, AdamState& state,
                                 const Matrix& real_batch,
                                 const Matrix& fake_batch,
                                 LossReduction reduction);

// One generator update through a frozen critic: softplus(-red(f(G(z)))).
// Critic parameter values are untouched (its gradients are scratch).
double generator_update_step(NetworkParams& gen, NetworkParams& disc,
                             AdamState& gen_state, const Matrix& latent_batch,
                             LossReduction reduction);

// Generator samples decoded from latents, eval mode by default.
Matrix generate_samples(NetworkParams& gen, const Matrix& latents,
                        bool train_mode = false);

// Alternating WGAN training with an optional auxiliary critic that sees the
// exact same batches and updates as the original but never drives the
// generator.  Throws TrainingAbort on a non-finite loss (after writing
// recovery checkpoints when configured).
TrainedBundle train_gan(const GanConfig& config);

// ---------------------------------------------------------------------------
// Independent discriminator protocol

// Where independent critics get generator-side samples.  The indirection
// lets tests swap the generator for the data distribution itself (the
// zero-divergence baseline).  checksum() guards that sampling has no side
// effects on the source.
class SampleSource {
 public:
  virtual ~SampleSource() = default;
  virtual Matrix sample(std::size_t n, std::uint64_t seed) const = 0;
  virtual std::uint64_t checksum() const = 0;
};

class GeneratorSource : public SampleSource {
 public:
  GeneratorSource(NetworkParams& gen, std::size_t latent_dim)
      : gen_(gen), latent_dim_(latent_dim) {}
  Matrix sample(std::size_t n, std::uint64_t seed) const override;
  std::uint64_t checksum() const override { return gen_.state_checksum(); }

 private:
  NetworkParams& gen_;
  std::size_t latent_dim_;
};

class DistributionSource : public SampleSource {
 public:
  explicit DistributionSource(const DistributionSpec& spec) : spec_(spec) {}
  Matrix sample(std::size_t n, std::uint64_t seed) const override;
  std::uint64_t checksum() const override { return 0; }

 private:
  DistributionSpec spec_;
};

enum class TrainSplit { Train1, Train2 };

struct IndependentDiscConfig {
  std::size_t width_multiplier = 16;
  TrainSplit train_split = TrainSplit::Train1;
  long long steps = 5000;
  std::size_t batch_size = 64;
  CosineSchedule schedule{0.01, 5000, 0.0};
  LossReduction loss_reduction = LossReduction::Mean;
  std::uint64_t seed = 0;

  void validate() const;
};

struct IndependentResult {
  NetworkParams critic;
  // Post-hoc payoffs of the trained critic against a fixed held-out
  // generator sample set, on each real split.
  DivergenceEstimate on_train1, on_train2, on_test;
  // Payoff on the pair it was optimized on (selected split vs its fixed
  // generator training set).
  DivergenceEstimate on_train_pair;
};

// Trains a fresh critic on (selected real split, fixed generator sample set
// of equal size) with SGD under cosine decay, then evaluates it against
// `gen_eval`.  The generator must not change while training runs; sampling
// side effects are detected via SampleSource::checksum.
IndependentResult train_independent_discriminator(
    const SampleSource& gen_source, const DatasetSplit& split,
    const IndependentDiscConfig& config, const Matrix& gen_eval);

}  // namespace genlab
