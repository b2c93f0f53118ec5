#pragma once

#include <string>
#include <utility>
#include <vector>

#include "genlab/tensor.hpp"

namespace genlab {

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam moments for a fixed parameter list.  The list order at init must match
// the order passed to every adam_step call.
struct AdamState {
  AdamConfig config;
  long long step = 0;  // completed updates
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;

  static AdamState init(const std::vector<std::pair<std::string, Tensor>>& params,
                        const AdamConfig& config);
};

// One bias-corrected Adam update, in place.  Gradients must be populated and
// finite; a non-finite gradient aborts with the parameter named.
void adam_step(std::vector<std::pair<std::string, Tensor>>& params,
               AdamState& state);

// Plain SGD: w -= lr * g, with the same finiteness contract.
void sgd_step(std::vector<std::pair<std::string, Tensor>>& params, double lr);

// Half-cosine decay from base_lr to floor_lr over total_steps; steps past the
// end stay at floor_lr.
struct CosineSchedule {
  double base_lr = 0.01;
  long long total_steps = 1;
  double floor_lr = 0.0;
};

double cosine_lr(const CosineSchedule& schedule, long long step);

}  // namespace genlab
