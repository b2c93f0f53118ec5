#include "genlab/optim.hpp"

#include <cmath>

#include "genlab/kernels.hpp"

namespace genlab {

namespace {

void check_grad_finite(const std::string& name, const std::vector<double>& g) {
  for (double x : g)
    if (!std::isfinite(x))
      throw TrainingAbort("non-finite gradient in parameter " + name, -1);
}

}  // namespace

AdamState AdamState::init(
    const std::vector<std::pair<std::string, Tensor>>& params,
    const AdamConfig& config) {
  AdamState state;
  state.config = config;
  for (const auto& [name, t] : params) {
    state.m.emplace_back(t.size(), 0.0);
    state.v.emplace_back(t.size(), 0.0);
  }
  return state;
}

void adam_step(std::vector<std::pair<std::string, Tensor>>& params,
               AdamState& state) {
  if (params.size() != state.m.size())
    throw ContractError("adam_step: state tracks " +
                        std::to_string(state.m.size()) + " parameters, got " +
                        std::to_string(params.size()));
  const AdamConfig& c = state.config;
  const long long t = state.step + 1;
  const double inv_bc1 = 1.0 / (1.0 - std::pow(c.beta1, static_cast<double>(t)));
  const double inv_bc2 = 1.0 / (1.0 - std::pow(c.beta2, static_cast<double>(t)));
  const auto& ops = kernels::active_ops();
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& [name, p] = params[i];
    const std::vector<double>& g = p.grad();
    if (state.m[i].size() != p.size())
      throw ContractError("adam_step: parameter " + name + " changed size");
    check_grad_finite(name, g);
    ops.adam_update(p.data().data(), g.data(), state.m[i].data(),
                    state.v[i].data(), p.size(), c.lr, c.beta1, c.beta2, c.eps,
                    inv_bc1, inv_bc2);
  }
  state.step = t;
}

void sgd_step(std::vector<std::pair<std::string, Tensor>>& params, double lr) {
  const auto& ops = kernels::active_ops();
  for (auto& [name, p] : params) {
    const std::vector<double>& g = p.grad();
    check_grad_finite(name, g);
    ops.sgd_update(p.data().data(), g.data(), lr, p.size());
  }
}

double cosine_lr(const CosineSchedule& schedule, long long step) {
  if (schedule.total_steps <= 0)
    throw ContractError("cosine schedule: total_steps must be positive");
  if (step < 0) throw ContractError("cosine schedule: negative step");
  if (step >= schedule.total_steps) return schedule.floor_lr;
  const double frac =
      static_cast<double>(step) / static_cast<double>(schedule.total_steps);
  const double w = 0.5 * (1.0 + std::cos(M_PI * frac));
  return schedule.floor_lr + (schedule.base_lr - schedule.floor_lr) * w;
}

}  // namespace genlab
