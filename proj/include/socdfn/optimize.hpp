#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "socdfn/network.hpp"

namespace socdfn {

enum class OptimizerKind { sgd, rmsprop, adam };

std::string to_string(OptimizerKind k);
OptimizerKind optimizer_from_string(const std::string& s);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::adam;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double rho = 0.9;
  double epsilon = 1e-8;

  void validate() const;
};

/// Per-parameter moment estimates, shaped like the network they belong to.
/// RMSProp leaves first_moment at zero.
struct OptimizerState {
  std::uint64_t step = 0;
  std::vector<LayerParams> first_moment;
  std::vector<LayerParams> second_moment;
};

OptimizerState init_optimizer_state(const Network& net);

/// w <- w - lr * g
void sgd_step(Network& net, const GradientSet& grads, const OptimizerConfig& cfg);

/// v <- rho*v + (1-rho)*g^2;  w <- w - lr * g / (sqrt(v) + eps)
void rmsprop_step(OptimizerState& state, Network& net, const GradientSet& grads, const OptimizerConfig& cfg);

/// Adam with bias-corrected moments.
void adam_step(OptimizerState& state, Network& net, const GradientSet& grads, const OptimizerConfig& cfg);

/// Dispatches on cfg.kind; SGD still advances state.step.
void optimizer_step(OptimizerState& state, Network& net, const GradientSet& grads, const OptimizerConfig& cfg);

}  // namespace socdfn
