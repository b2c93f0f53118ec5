#include "genlab/nn.hpp"

#include <cmath>
#include <cstring>

#include "genlab/rng.hpp"

namespace genlab {

namespace {

bool is_pow2_ge4(std::size_t m) { return m >= 4 && (m & (m - 1)) == 0; }

// Normalize in place; a vector with norm below 1e-12 becomes all zeros so a
// zero weight matrix degrades gracefully instead of dividing by zero.
void normalize(std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  double norm = std::sqrt(s);
  if (norm < 1e-12) {
    for (double& x : v) x = 0.0;
    return;
  }
  for (double& x : v) x /= norm;
}

}  // namespace

void NetworkSpec::validate() const {
  if (input_dim == 0 || output_dim == 0)
    throw SpecError("network spec: input and output dims must be positive");
  for (std::size_t w : hidden_widths)
    if (w == 0) throw SpecError("network spec: zero-width hidden layer");
  if (width_multiplier != 0 && !is_pow2_ge4(width_multiplier))
    throw SpecError("network spec: width multiplier " +
                    std::to_string(width_multiplier) +
                    " is not a power of two >= 4");
  if (role == Role::Generator && spectral_norm)
    throw SpecError("network spec: spectral norm belongs to discriminators");
  if (role == Role::Discriminator && batchnorm)
    throw SpecError("network spec: batchnorm belongs to the generator");
}

NetworkSpec generator_spec(std::size_t latent_dim, std::size_t data_dim,
                           std::vector<std::size_t> hidden) {
  NetworkSpec spec;
  spec.role = Role::Generator;
  spec.input_dim = latent_dim;
  spec.output_dim = data_dim;
  spec.hidden_widths = std::move(hidden);
  spec.batchnorm = true;
  spec.validate();
  return spec;
}

NetworkSpec discriminator_spec(std::size_t data_dim,
                               std::size_t width_multiplier) {
  NetworkSpec spec;
  spec.role = Role::Discriminator;
  spec.input_dim = data_dim;
  spec.output_dim = 1;
  spec.hidden_widths = {2 * width_multiplier, 2 * width_multiplier};
  spec.spectral_norm = true;
  spec.width_multiplier = width_multiplier;
  spec.validate();
  return spec;
}

std::size_t parameter_count(const NetworkSpec& spec) {
  spec.validate();
  std::size_t count = 0;
  std::size_t in = spec.input_dim;
  for (std::size_t h : spec.hidden_widths) {
    count += h * in + h;
    if (spec.batchnorm) count += 2 * h;
    in = h;
  }
  count += spec.output_dim * in + spec.output_dim;
  return count;
}

NetworkParams init_network(const NetworkSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng rng(seed);
  NetworkParams net;
  net.spec = spec;
  net.init_seed = seed;

  std::vector<std::size_t> dims;
  dims.push_back(spec.input_dim);
  for (std::size_t h : spec.hidden_widths) dims.push_back(h);
  dims.push_back(spec.output_dim);

  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const std::size_t in = dims[l], out = dims[l + 1];
    DenseLayer layer;
    layer.spectral_norm = spec.spectral_norm;
    const double sd = std::sqrt(2.0 / static_cast<double>(in));
    std::vector<double> w(out * in);
    for (double& x : w) x = sd * rng.normal();
    layer.W = Tensor::matrix(out, in, std::move(w), /*requires_grad=*/true);
    layer.b = Tensor::zeros({out}, /*requires_grad=*/true);
    if (layer.spectral_norm) {
      layer.u.resize(out);
      for (double& x : layer.u) x = rng.normal();
      normalize(layer.u);
      if (layer.u[0] == 0.0 && out > 0) layer.u[0] = 1.0;
    }
    net.layers.push_back(std::move(layer));
  }

  if (spec.batchnorm) {
    for (std::size_t h : spec.hidden_widths) {
      BatchNormState bn;
      bn.gamma = Tensor::from_data({h}, std::vector<double>(h, 1.0),
                                   /*requires_grad=*/true);
      bn.beta = Tensor::zeros({h}, /*requires_grad=*/true);
      bn.running_mean.assign(h, 0.0);
      bn.running_var.assign(h, 1.0);
      net.batchnorms.push_back(std::move(bn));
    }
  }
  return net;
}

std::vector<std::pair<std::string, Tensor>> NetworkParams::trainables() {
  std::vector<std::pair<std::string, Tensor>> out;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const std::string p = "layer" + std::to_string(l);
    out.emplace_back(p + ".W", layers[l].W);
    out.emplace_back(p + ".b", layers[l].b);
    if (l < batchnorms.size()) {
      const std::string q = "bn" + std::to_string(l);
      out.emplace_back(q + ".gamma", batchnorms[l].gamma);
      out.emplace_back(q + ".beta", batchnorms[l].beta);
    }
  }
  return out;
}

void NetworkParams::zero_grads() {
  for (auto& [name, t] : trainables()) t.zero_grad();
}

std::vector<double> NetworkParams::state_vector() const {
  std::vector<double> out;
  auto append = [&out](const std::vector<double>& v) {
    out.insert(out.end(), v.begin(), v.end());
  };
  for (std::size_t l = 0; l < layers.size(); ++l) {
    append(layers[l].W.data());
    append(layers[l].b.data());
    if (layers[l].spectral_norm) append(layers[l].u);
    if (l < batchnorms.size()) {
      append(batchnorms[l].gamma.data());
      append(batchnorms[l].beta.data());
      append(batchnorms[l].running_mean);
      append(batchnorms[l].running_var);
    }
  }
  return out;
}

std::uint64_t NetworkParams::state_checksum() const {
  const std::vector<double> state = state_vector();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const unsigned char* bytes =
      reinterpret_cast<const unsigned char*>(state.data());
  for (std::size_t i = 0; i < state.size() * sizeof(double); ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

NetworkParams NetworkParams::clone() const {
  NetworkParams out;
  out.spec = spec;
  out.init_seed = init_seed;
  for (const DenseLayer& l : layers) {
    DenseLayer c;
    c.W = Tensor::from_data(l.W.shape(), l.W.data(), true);
    c.b = Tensor::from_data(l.b.shape(), l.b.data(), true);
    c.u = l.u;
    c.spectral_norm = l.spectral_norm;
    out.layers.push_back(std::move(c));
  }
  for (const BatchNormState& bn : batchnorms) {
    BatchNormState c;
    c.gamma = Tensor::from_data(bn.gamma.shape(), bn.gamma.data(), true);
    c.beta = Tensor::from_data(bn.beta.shape(), bn.beta.data(), true);
    c.running_mean = bn.running_mean;
    c.running_var = bn.running_var;
    out.batchnorms.push_back(std::move(c));
  }
  return out;
}

Tensor spectral_norm_apply(Tape& tape, DenseLayer& layer, int power_iters,
                           bool update_u) {
  const std::size_t out = layer.W.rows(), in = layer.W.cols();
  if (layer.u.size() != out)
    throw ContractError("spectral norm: u has size " +
                        std::to_string(layer.u.size()) + ", expected " +
                        std::to_string(out));
  const double* w = layer.W.data().data();

  // Power iteration on raw values; gradients treat u and v as constants.
  std::vector<double> v(in, 0.0);
  auto v_step = [&]() {
    for (std::size_t j = 0; j < in; ++j) {
      double acc = 0.0;
      for (std::size_t i = 0; i < out; ++i) acc += w[i * in + j] * layer.u[i];
      v[j] = acc;
    }
    normalize(v);
  };
  if (update_u) {
    if (power_iters < 1)
      throw ContractError("spectral norm: power_iters must be >= 1");
    for (int it = 0; it < power_iters; ++it) {
      v_step();
      for (std::size_t i = 0; i < out; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < in; ++j) acc += w[i * in + j] * v[j];
        layer.u[i] = acc;
      }
      normalize(layer.u);
    }
  } else {
    v_step();
  }

  // sigma_hat = u^T W v as a tape expression so d(sigma)/dW = u v^T flows
  // into the scaled weights.
  Tensor ut = Tensor::matrix(1, out, layer.u);
  Tensor vc = Tensor::matrix(in, 1, v);
  Tensor wv = tape.matmul(layer.W, vc);
  Tensor sigma = tape.matmul(ut, wv);
  Tensor sigma_safe = tape.clamp_min(sigma, 1e-12);
  return tape.mul_scalar(layer.W, tape.recip(sigma_safe));
}

Tensor forward(Tape& tape, NetworkParams& net, const Tensor& x,
               const ForwardOptions& opts) {
  if (x.ndim() != 2 || x.cols() != net.spec.input_dim)
    throw DimensionError("forward: input " + shape_str(x.shape()) +
                         " does not match input_dim " +
                         std::to_string(net.spec.input_dim));
  const std::size_t n_layers = net.layers.size();
  const bool update_u = opts.train && !opts.freeze_power_iteration;

  Tensor h = x;
  for (std::size_t l = 0; l < n_layers; ++l) {
    DenseLayer& layer = net.layers[l];
    Tensor w_eff =
        layer.spectral_norm
            ? spectral_norm_apply(tape, layer, opts.power_iters, update_u)
            : layer.W;
    h = tape.matmul(h, tape.transpose(w_eff));
    h = tape.add_bias_row(h, layer.b);
    const bool hidden = l + 1 < n_layers;
    if (hidden) {
      if (l < net.batchnorms.size()) {
        BatchNormState& bn = net.batchnorms[l];
        h = tape.batchnorm(h, bn.gamma, bn.beta, bn.running_mean,
                           bn.running_var, opts.train);
      }
      h = net.spec.activation == Activation::Tanh ? tape.tanh_elem(h)
                                                  : tape.leaky_relu(h, 0.2);
    }
  }
  if (net.spec.role == Role::Generator) h = tape.tanh_elem(h);
  return h;
}

}  // namespace genlab
