#include "socdfn/optimize.hpp"

#include <cmath>

namespace socdfn {

namespace {

void check_congruent(const Network& net, const GradientSet& grads) {
  if (grads.layers.size() != net.layer_count()) throw ShapeError("gradient set has the wrong number of layers");
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    const auto& p = net.params(l);
    const auto& g = grads.layers[l];
    if (g.weights.rows() != p.weights.rows() || g.weights.cols() != p.weights.cols() ||
        g.biases.size() != p.biases.size())
      throw ShapeError("gradient for layer " + std::to_string(l) + " does not match the network");
  }
}

void check_state(const OptimizerState& state, const Network& net) {
  auto matches = [&net](const std::vector<LayerParams>& m) {
    if (m.size() != net.layer_count()) return false;
    for (std::size_t l = 0; l < m.size(); ++l) {
      const auto& p = net.params(l);
      if (m[l].weights.rows() != p.weights.rows() || m[l].weights.cols() != p.weights.cols() ||
          m[l].biases.size() != p.biases.size())
        return false;
    }
    return true;
  };
  if (!matches(state.first_moment) || !matches(state.second_moment))
    throw ShapeError("optimizer state does not match the network");
}

// Applies `update(param, grad, m, v)` to every weight and bias in lockstep.
template <typename F>
void for_each_parameter(OptimizerState& state, Network& net, const GradientSet& grads, F&& update) {
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    auto& p = net.mutable_params(l);
    const auto& g = grads.layers[l];
    auto& m = state.first_moment[l];
    auto& v = state.second_moment[l];
    auto run = [&](std::span<double> w, std::span<const double> gs, std::span<double> ms, std::span<double> vs) {
      for (std::size_t i = 0; i < w.size(); ++i) update(w[i], gs[i], ms[i], vs[i]);
    };
    run(p.weights.data(), g.weights.data(), m.weights.data(), v.weights.data());
    run(p.biases.data(), g.biases.data(), m.biases.data(), v.biases.data());
  }
}

}  // namespace

std::string to_string(OptimizerKind k) {
  switch (k) {
    case OptimizerKind::sgd: return "sgd";
    case OptimizerKind::rmsprop: return "rmsprop";
    case OptimizerKind::adam: return "adam";
  }
  return "?";
}

OptimizerKind optimizer_from_string(const std::string& s) {
  if (s == "sgd") return OptimizerKind::sgd;
  if (s == "rmsprop") return OptimizerKind::rmsprop;
  if (s == "adam") return OptimizerKind::adam;
  throw ConfigError("unknown optimizer '" + s + "' (expected sgd, rmsprop or adam)");
}

void OptimizerConfig::validate() const {
  if (!(learning_rate >= 0.0)) throw ConfigError("learning rate must be non-negative");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  for (double b : {beta1, beta2, rho})
    if (!(b >= 0.0 && b < 1.0)) throw ConfigError("beta1, beta2 and rho must lie in [0,1)");
}

OptimizerState init_optimizer_state(const Network& net) {
  OptimizerState s;
  for (const auto& spec : net.specs()) {
    s.first_moment.push_back({Matrix(spec.in_dim, spec.out_dim), Vector(spec.out_dim)});
    s.second_moment.push_back({Matrix(spec.in_dim, spec.out_dim), Vector(spec.out_dim)});
  }
  return s;
}

void sgd_step(Network& net, const GradientSet& grads, const OptimizerConfig& cfg) {
  check_congruent(net, grads);
  const double lr = cfg.learning_rate;
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    auto& p = net.mutable_params(l);
    const auto& g = grads.layers[l];
    auto w = p.weights.data();
    auto gw = g.weights.data();
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= lr * gw[i];
    auto b = p.biases.data();
    auto gb = g.biases.data();
    for (std::size_t i = 0; i < b.size(); ++i) b[i] -= lr * gb[i];
  }
}

void rmsprop_step(OptimizerState& state, Network& net, const GradientSet& grads, const OptimizerConfig& cfg) {
  check_congruent(net, grads);
  check_state(state, net);
  ++state.step;
  const double lr = cfg.learning_rate;
  const double rho = cfg.rho;
  const double eps = cfg.epsilon;
  for_each_parameter(state, net, grads, [=](double& w, double g, double&, double& v) {
    v = rho * v + (1.0 - rho) * g * g;
    w -= lr * g / (std::sqrt(v) + eps);
  });
}

void adam_step(OptimizerState& state, Network& net, const GradientSet& grads, const OptimizerConfig& cfg) {
  check_congruent(net, grads);
  check_state(state, net);
  ++state.step;
  const double lr = cfg.learning_rate;
  const double b1 = cfg.beta1;
  const double b2 = cfg.beta2;
  const double eps = cfg.epsilon;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(b1, t);
  const double c2 = 1.0 - std::pow(b2, t);
  for_each_parameter(state, net, grads, [=](double& w, double g, double& m, double& v) {
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g * g;
    const double m_hat = m / c1;
    const double v_hat = v / c2;
    w -= lr * m_hat / (std::sqrt(v_hat) + eps);
  });
}

void optimizer_step(OptimizerState& state, Network& net, const GradientSet& grads, const OptimizerConfig& cfg) {
  switch (cfg.kind) {
    case OptimizerKind::sgd:
      sgd_step(net, grads, cfg);
      ++state.step;
      return;
    case OptimizerKind::rmsprop: rmsprop_step(state, net, grads, cfg); return;
    case OptimizerKind::adam: adam_step(state, net, grads, cfg); return;
  }
}

}  // namespace socdfn
