#pragma once

// Central finite-difference oracle for the network objective. It recomputes
// the loss from forward outputs and raw weights with plain loops, so it
// shares nothing with backward() beyond forward() itself.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "socdfn/network.hpp"

namespace socdfn::test {

inline double objective(const Network& net, const Matrix& x, const Vector& y, const RegConfig& reg,
                        std::uint64_t dropout_seed) {
  const auto out = forward(net, x, Mode::train, dropout_seed);
  double data = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double e = y[i] - out.prediction[i];
    data += e * e;
  }
  data /= static_cast<double>(y.size());
  double sq = 0.0;
  double ab = 0.0;
  for (std::size_t l = 0; l < net.layer_count(); ++l)
    for (double w : net.params(l).weights.data()) {
      sq += w * w;
      ab += std::abs(w);
    }
  return data + reg.l2 * sq + reg.l1 * ab;
}

/// |a - n| / max(|a|, |n|, floor); the floor keeps near-zero entries from
/// turning round-off into huge ratios.
inline double relative_error(double analytic, double numeric, double floor = 1e-3) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

struct GradCheckResult {
  double worst = 0.0;
  std::string where;
  std::size_t checked = 0;
};

/// Compares every weight and bias gradient with a central difference of the
/// given step.
inline GradCheckResult grad_check(const Network& start, const Matrix& x, const Vector& y, const RegConfig& reg,
                                  std::uint64_t dropout_seed, double step = 1e-7) {
  GradCheckResult res;
  const auto fwd = forward(start, x, Mode::train, dropout_seed);
  const auto analytic = backward(start, fwd.cache, y, reg);
  Network net = start;
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    for (int kind = 0; kind < 2; ++kind) {
      const std::size_t count = kind == 0 ? net.params(l).weights.size() : net.params(l).biases.size();
      for (std::size_t i = 0; i < count; ++i) {
        auto slot = [&]() -> double& {
          auto& p = net.mutable_params(l);
          return kind == 0 ? p.weights.data()[i] : p.biases.data()[i];
        };
        const double orig = slot();
        slot() = orig + step;
        const double up = objective(net, x, y, reg, dropout_seed);
        slot() = orig - step;
        const double down = objective(net, x, y, reg, dropout_seed);
        slot() = orig;
        const double numeric = (up - down) / (2.0 * step);
        const double a = kind == 0 ? analytic.grads.layers[l].weights.data()[i] : analytic.grads.layers[l].biases[i];
        const double err = relative_error(a, numeric);
        ++res.checked;
        if (err > res.worst) {
          res.worst = err;
          res.where = "layer " + std::to_string(l) + (kind == 0 ? " W[" : " b[") + std::to_string(i) + "]";
        }
      }
    }
  }
  return res;
}

}  // namespace socdfn::test
