#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "genlab/nn.hpp"

namespace genlab {

// Named view of one contiguous block of network state, in canonical order:
// per layer W, b, u (spectral norm), then gamma, beta, running_mean,
// running_var for its batchnorm.  Checkpoints and audits both walk this.
struct StateSegment {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<double>* values;
};

std::vector<StateSegment> state_segments(NetworkParams& net);

struct CheckpointMeta {
  std::string label;      // e.g. "generator", "disc_auxiliary"
  std::uint64_t seed = 0; // init seed of the stored network
  long long step = 0;     // training step the state was captured at
};

// Single-file format: one JSON header line (spec, segment table, metadata)
// followed by the raw little-endian doubles of every segment in order.
void save_checkpoint(const NetworkParams& net, const CheckpointMeta& meta,
                     const std::string& path);

NetworkParams load_checkpoint(const std::string& path,
                              CheckpointMeta* meta = nullptr);

}  // namespace genlab
