#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "genlab/tensor.hpp"

namespace genlab {

enum class Role { Generator, Discriminator };

// Hidden-layer activation.  Both networks use leaky ReLU(0.2) between
// layers; the generator additionally maps its output through tanh.
enum class Activation { LeakyRelu02, Tanh };

struct NetworkSpec {
  Role role = Role::Discriminator;
  std::size_t input_dim = 0;
  std::size_t output_dim = 0;
  std::vector<std::size_t> hidden_widths;
  Activation activation = Activation::LeakyRelu02;
  bool batchnorm = false;       // generator hidden layers
  bool spectral_norm = false;   // discriminator dense layers
  // Capacity knob the hidden widths were derived from (0 when they were
  // given explicitly).  Restricted to powers of two >= 4.
  std::size_t width_multiplier = 0;

  void validate() const;  // throws SpecError
  bool operator==(const NetworkSpec&) const = default;
};

// Fixed-capacity generator: latent -> hidden -> ... -> data, batchnorm plus
// leaky ReLU after each hidden layer, tanh on the output.
NetworkSpec generator_spec(std::size_t latent_dim, std::size_t data_dim,
                           std::vector<std::size_t> hidden = {64, 64});

// Discriminator with two hidden layers of width 2*m, spectral norm on every
// dense layer, scalar output.  m is the sweep's capacity axis.
NetworkSpec discriminator_spec(std::size_t data_dim, std::size_t width_multiplier);

// Trainable parameters plus layer state of one dense layer.  W is
// [out x in]; u is the persistent left vector of the power iteration and is
// state, not a parameter.
struct DenseLayer {
  Tensor W;
  Tensor b;
  std::vector<double> u;
  bool spectral_norm = false;
};

struct BatchNormState {
  Tensor gamma;
  Tensor beta;
  std::vector<double> running_mean;
  std::vector<double> running_var;
};

struct NetworkParams {
  NetworkSpec spec;
  std::vector<DenseLayer> layers;
  std::vector<BatchNormState> batchnorms;  // one per hidden layer when enabled
  std::uint64_t init_seed = 0;

  // Named trainable tensors in a fixed order (checkpoint and optimizer order).
  std::vector<std::pair<std::string, Tensor>> trainables();
  void zero_grads();

  // All parameters and state (weights, biases, bn affine + running stats,
  // power-iteration vectors) flattened in a fixed order.
  std::vector<double> state_vector() const;
  // FNV-1a over the state vector bytes; detects any mutation.
  std::uint64_t state_checksum() const;

  NetworkParams clone() const;
};

std::size_t parameter_count(const NetworkSpec& spec);

// He-normal weights (sd = sqrt(2 / fan_in)), zero biases, unit-normalized
// random power-iteration vectors, batchnorm gamma=1/beta=0.  Draw order is
// fixed (per layer: W row-major, then u), so a seed pins every value.
NetworkParams init_network(const NetworkSpec& spec, std::uint64_t seed);

struct ForwardOptions {
  // Batchnorm uses batch statistics and updates running buffers; spectral
  // norm refreshes and persists u.  Eval (false) uses running statistics and
  // freezes u.
  bool train = false;
  // Power-iteration rounds per forward in train mode.
  int power_iters = 1;
  // Gradient-check mode: batch statistics like training, but u frozen so the
  // recorded graph matches the analytic derivative exactly.
  bool freeze_power_iteration = false;
};

// One spectral-norm application: runs the power iteration on W (persisting u
// unless frozen), then returns W / sigma_hat as a tape expression whose
// backward treats u and v as constants.  sigma_hat is clamped at 1e-12; a zero
// matrix passes through unchanged.
Tensor spectral_norm_apply(Tape& tape, DenseLayer& layer, int power_iters,
                           bool update_u);

// Full forward pass over a batch x [n x input_dim].
Tensor forward(Tape& tape, NetworkParams& net, const Tensor& x,
               const ForwardOptions& opts = {});

}  // namespace genlab
