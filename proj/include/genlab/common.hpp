#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace genlab {

// Operand shapes do not line up.
struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A call-contract violation (empty input, mismatched sizes, bad mode).
struct ContractError : std::logic_error {
  using std::logic_error::logic_error;
};

// Invalid network / distribution / sweep specification.
struct SpecError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Malformed config file or bad CLI usage.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A training loop hit a non-finite loss or gradient and stopped.
struct TrainingAbort : std::runtime_error {
  TrainingAbort(const std::string& what, long long step)
      : std::runtime_error(what), step(step) {}
  long long step = -1;
};

std::string shape_str(const std::vector<std::size_t>& shape);

}  // namespace genlab
