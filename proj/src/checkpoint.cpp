#include "genlab/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

namespace genlab {

namespace {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "checkpoint payload assumes a little-endian host");

json spec_to_json(const NetworkSpec& spec) {
  return json{
      {"role", spec.role == Role::Generator ? "generator" : "discriminator"},
      {"input_dim", spec.input_dim},
      {"output_dim", spec.output_dim},
      {"hidden", spec.hidden_widths},
      {"activation",
       spec.activation == Activation::Tanh ? "tanh" : "leaky_relu"},
      {"batchnorm", spec.batchnorm},
      {"spectral_norm", spec.spectral_norm},
      {"width_multiplier", spec.width_multiplier},
  };
}

NetworkSpec spec_from_json(const json& j) {
  NetworkSpec spec;
  const std::string role = j.at("role").get<std::string>();
  if (role == "generator")
    spec.role = Role::Generator;
  else if (role == "discriminator")
    spec.role = Role::Discriminator;
  else
    throw ContractError("checkpoint: unknown role '" + role + "'");
  spec.input_dim = j.at("input_dim").get<std::size_t>();
  spec.output_dim = j.at("output_dim").get<std::size_t>();
  spec.hidden_widths = j.at("hidden").get<std::vector<std::size_t>>();
  const std::string act = j.at("activation").get<std::string>();
  if (act == "tanh")
    spec.activation = Activation::Tanh;
  else if (act == "leaky_relu")
    spec.activation = Activation::LeakyRelu02;
  else
    throw ContractError("checkpoint: unknown activation '" + act + "'");
  spec.batchnorm = j.at("batchnorm").get<bool>();
  spec.spectral_norm = j.at("spectral_norm").get<bool>();
  spec.width_multiplier = j.at("width_multiplier").get<std::size_t>();
  return spec;
}

}  // namespace

std::vector<StateSegment> state_segments(NetworkParams& net) {
  std::vector<StateSegment> out;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    DenseLayer& layer = net.layers[l];
    const std::string p = "layer" + std::to_string(l);
    out.push_back({p + ".W", layer.W.shape(), &layer.W.data()});
    out.push_back({p + ".b", layer.b.shape(), &layer.b.data()});
    if (layer.spectral_norm)
      out.push_back({p + ".u", {layer.u.size()}, &layer.u});
    if (l < net.batchnorms.size()) {
      BatchNormState& bn = net.batchnorms[l];
      const std::string q = "bn" + std::to_string(l);
      out.push_back({q + ".gamma", bn.gamma.shape(), &bn.gamma.data()});
      out.push_back({q + ".beta", bn.beta.shape(), &bn.beta.data()});
      out.push_back(
          {q + ".running_mean", {bn.running_mean.size()}, &bn.running_mean});
      out.push_back(
          {q + ".running_var", {bn.running_var.size()}, &bn.running_var});
    }
  }
  return out;
}

void save_checkpoint(const NetworkParams& net, const CheckpointMeta& meta,
                     const std::string& path) {
  // Segments only read here; the non-const walk is shared with load.
  auto segments = state_segments(const_cast<NetworkParams&>(net));
  json seg_table = json::array();
  std::size_t value_count = 0;
  for (const StateSegment& s : segments) {
    seg_table.push_back(json{{"name", s.name}, {"shape", s.shape}});
    value_count += s.values->size();
  }
  json header{
      {"format", "genlab-checkpoint"},
      {"version", 1},
      {"label", meta.label},
      {"seed", meta.seed},
      {"step", meta.step},
      {"spec", spec_to_json(net.spec)},
      {"segments", seg_table},
      {"value_count", value_count},
  };

  std::ofstream os(path, std::ios::binary);
  if (!os) throw ContractError("cannot open " + path + " for writing");
  os << header.dump() << '\n';
  for (const StateSegment& s : segments)
    os.write(reinterpret_cast<const char*>(s.values->data()),
             static_cast<std::streamsize>(s.values->size() * sizeof(double)));
  if (!os) throw ContractError("failed writing " + path);
}

NetworkParams load_checkpoint(const std::string& path, CheckpointMeta* meta) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ContractError("cannot open " + path);
  std::string line;
  if (!std::getline(is, line))
    throw ContractError(path + ": missing checkpoint header");
  json header;
  try {
    header = json::parse(line);
  } catch (const json::exception& e) {
    throw ContractError(path + ": bad checkpoint header: " + e.what());
  }
  if (header.value("format", "") != "genlab-checkpoint")
    throw ContractError(path + ": not a genlab checkpoint");

  const NetworkSpec spec = spec_from_json(header.at("spec"));
  NetworkParams net = init_network(spec, header.at("seed").get<std::uint64_t>());
  auto segments = state_segments(net);

  const auto& seg_table = header.at("segments");
  if (seg_table.size() != segments.size())
    throw ContractError(path + ": segment table does not match spec");
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (seg_table[i].at("name").get<std::string>() != segments[i].name)
      throw ContractError(path + ": unexpected segment " +
                          seg_table[i].at("name").get<std::string>());
    is.read(reinterpret_cast<char*>(segments[i].values->data()),
            static_cast<std::streamsize>(segments[i].values->size() *
                                         sizeof(double)));
    if (!is) throw ContractError(path + ": truncated checkpoint payload");
  }
  if (meta) {
    meta->label = header.value("label", "");
    meta->seed = header.at("seed").get<std::uint64_t>();
    meta->step = header.at("step").get<long long>();
  }
  return net;
}

}  // namespace genlab
