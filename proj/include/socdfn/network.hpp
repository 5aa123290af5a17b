#pragma once

// Dense feedforward regressor: ReLU hidden layers, a linear scalar output,
// optional inverted dropout after any hidden layer, and hand-derived
// backpropagation of the MSE (or MAE) objective plus L1/L2 weight penalties.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "socdfn/dataset.hpp"
#include "socdfn/tensor.hpp"

namespace socdfn {

enum class Activation { relu, linear };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

struct LayerSpec {
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  Activation activation = Activation::relu;
  double dropout_after = 0.0;  // rate in [0,1); 0 disables

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

/// `hidden` ReLU layers of `units` each (dropout `dropout` after every one)
/// followed by the linear 1-unit output.
std::vector<LayerSpec> dense_stack(std::size_t inputs, std::size_t hidden, std::size_t units, double dropout = 0.0);

/// Throws ShapeError unless the specs chain, end in a linear width-1 layer,
/// carry valid dropout rates and leave the output layer without dropout.
void validate_specs(std::span<const LayerSpec> specs);

struct RegConfig {
  double l1 = 0.0;
  double l2 = 0.0;

  void validate() const;
};

struct LayerParams {
  Matrix weights;  // in_dim x out_dim
  Vector biases;   // out_dim

  friend bool operator==(const LayerParams&, const LayerParams&) = default;
};

class Network {
 public:
  Network(std::vector<LayerSpec> specs, std::vector<LayerParams> params);

  const std::vector<LayerSpec>& specs() const noexcept { return specs_; }
  std::size_t layer_count() const noexcept { return specs_.size(); }
  std::size_t input_dim() const noexcept { return specs_.front().in_dim; }
  std::size_t parameter_count() const noexcept;

  const LayerParams& params(std::size_t layer) const { return params_.at(layer); }
  /// Mutable access marks the parameters as changed, which invalidates any
  /// forward cache taken earlier.
  LayerParams& mutable_params(std::size_t layer);

  /// Identifies the current parameter state; copies share it until mutated.
  std::uint64_t revision() const noexcept { return revision_; }

  /// FNV-1a over the raw parameter bytes.
  std::uint64_t parameter_hash() const noexcept;

  friend bool operator==(const Network& a, const Network& b) {
    return a.specs_ == b.specs_ && a.params_ == b.params_;
  }

 private:
  std::vector<LayerSpec> specs_;
  std::vector<LayerParams> params_;
  std::uint64_t revision_;
};

/// He-normal weights (variance 2 / in_dim) and zero biases.
Network init_network(std::vector<LayerSpec> specs, std::uint64_t seed);

/// Same shape as a Network; holds d(objective)/d(parameter).
struct GradientSet {
  std::vector<LayerParams> layers;
};

GradientSet zero_gradients(const Network& net);

enum class Mode { train, inference };
enum class LossKind { mse, mae };

std::string to_string(LossKind k);

struct ForwardCache {
  Mode mode = Mode::inference;
  std::uint64_t revision = 0;
  Matrix input{1, 1};
  std::vector<Matrix> pre;                 // z per layer
  std::vector<Matrix> post;                // g(z), after the dropout mask when present
  std::vector<std::optional<Matrix>> masks;  // 0 or 1/keep per unit
};

struct ForwardResult {
  Vector prediction;
  ForwardCache cache;
};

/// z = aW + b, a = g(z) per layer. In train mode each layer with a dropout
/// rate draws a fresh mask from dropout_seed; inference mode ignores dropout.
ForwardResult forward(const Network& net, const Matrix& x, Mode mode, std::uint64_t dropout_seed = 0);

/// Inference-mode outputs without keeping a cache.
Vector predict(const Network& net, const Matrix& x);

/// Mean over the batch of (target - pred)^2.
double loss_mse(const Vector& pred, const Vector& target);

/// l2 * sum(w^2) + l1 * sum(|w|) over all weight matrices; biases excluded.
double penalty(const Network& net, const RegConfig& reg);

struct BackwardResult {
  GradientSet grads;
  double loss = 0.0;       // data loss + penalty
  double data_loss = 0.0;  // MSE or MAE of the cached predictions
};

/// Gradients of [data loss + penalty] with the cached dropout masks replayed.
/// The L1 subgradient at w == 0 is 0. Throws ContractError when the cache
/// does not come from a train-mode forward of `net` in its current state.
BackwardResult backward(const Network& net, const ForwardCache& cache, const Vector& target, const RegConfig& reg,
                        LossKind loss = LossKind::mse);

/// Normalizes raw rows, runs inference and clamps to [0, 100] percent.
Vector predict_soc(const Network& net, const Normalizer& norm, std::span<const SampleRecord> raw);

}  // namespace socdfn
