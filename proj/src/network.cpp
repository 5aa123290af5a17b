#include "socdfn/network.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>

#include "socdfn/rng.hpp"

namespace socdfn {

namespace {

std::uint64_t next_revision() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1, std::memory_order_relaxed);
}

double relu(double z) { return z > 0.0 ? z : 0.0; }

}  // namespace

std::string to_string(Activation a) { return a == Activation::relu ? "relu" : "linear"; }

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::relu;
  if (s == "linear") return Activation::linear;
  throw ParseError("unknown activation '" + s + "'");
}

std::string to_string(LossKind k) { return k == LossKind::mse ? "mse" : "mae"; }

std::vector<LayerSpec> dense_stack(std::size_t inputs, std::size_t hidden, std::size_t units, double dropout) {
  std::vector<LayerSpec> specs;
  std::size_t in = inputs;
  for (std::size_t h = 0; h < hidden; ++h) {
    specs.push_back({in, units, Activation::relu, dropout});
    in = units;
  }
  specs.push_back({in, 1, Activation::linear, 0.0});
  return specs;
}

void validate_specs(std::span<const LayerSpec> specs) {
  if (specs.empty()) throw ShapeError("network needs at least one layer");
  for (std::size_t l = 0; l < specs.size(); ++l) {
    const auto& s = specs[l];
    if (s.in_dim == 0 || s.out_dim == 0) throw ShapeError("layer " + std::to_string(l) + " has a zero dimension");
    if (!(s.dropout_after >= 0.0 && s.dropout_after < 1.0))
      throw ShapeError("layer " + std::to_string(l) + " dropout rate must lie in [0,1)");
    if (l + 1 < specs.size() && s.out_dim != specs[l + 1].in_dim)
      throw ShapeError("layer " + std::to_string(l) + " outputs " + std::to_string(s.out_dim) + " but layer " +
                       std::to_string(l + 1) + " expects " + std::to_string(specs[l + 1].in_dim));
  }
  const auto& last = specs.back();
  if (last.activation != Activation::linear || last.out_dim != 1)
    throw ShapeError("final layer must be linear with a single output");
  if (last.dropout_after != 0.0) throw ShapeError("final layer cannot carry dropout");
}

void RegConfig::validate() const {
  if (!(l1 >= 0.0) || !(l2 >= 0.0)) throw ConfigError("regularization coefficients must be non-negative");
}

Network::Network(std::vector<LayerSpec> specs, std::vector<LayerParams> params)
    : specs_(std::move(specs)), params_(std::move(params)), revision_(next_revision()) {
  validate_specs(specs_);
  if (params_.size() != specs_.size()) throw ShapeError("parameter count does not match layer count");
  for (std::size_t l = 0; l < specs_.size(); ++l) {
    const auto& w = params_[l].weights;
    if (w.rows() != specs_[l].in_dim || w.cols() != specs_[l].out_dim || params_[l].biases.size() != specs_[l].out_dim)
      throw ShapeError("layer " + std::to_string(l) + " parameters do not match its spec");
  }
}

std::size_t Network::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.weights.size() + p.biases.size();
  return n;
}

LayerParams& Network::mutable_params(std::size_t layer) {
  revision_ = next_revision();
  return params_.at(layer);
}

std::uint64_t Network::parameter_hash() const noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::span<const double> values) {
    for (double v : values) {
      unsigned char bytes[sizeof(double)];
      std::memcpy(bytes, &v, sizeof v);
      for (unsigned char b : bytes) {
        h ^= b;
        h *= 0x100000001b3ULL;
      }
    }
  };
  for (const auto& p : params_) {
    mix(p.weights.data());
    mix(p.biases.data());
  }
  return h;
}

Network init_network(std::vector<LayerSpec> specs, std::uint64_t seed) {
  validate_specs(specs);
  Rng rng(seed);
  std::vector<LayerParams> params;
  params.reserve(specs.size());
  for (const auto& s : specs) {
    Matrix w(s.in_dim, s.out_dim);
    const double scale = std::sqrt(2.0 / static_cast<double>(s.in_dim));
    for (double& v : w.data()) v = scale * rng.normal();
    params.push_back({std::move(w), Vector(s.out_dim)});
  }
  return Network(std::move(specs), std::move(params));
}

GradientSet zero_gradients(const Network& net) {
  GradientSet g;
  for (const auto& s : net.specs()) g.layers.push_back({Matrix(s.in_dim, s.out_dim), Vector(s.out_dim)});
  return g;
}

ForwardResult forward(const Network& net, const Matrix& x, Mode mode, std::uint64_t dropout_seed) {
  if (x.cols() != net.input_dim())
    throw ShapeError("forward: input " + x.shape_string() + " but network expects " +
                     std::to_string(net.input_dim()) + " features");
  ForwardResult out{Vector(x.rows()), {}};
  auto& cache = out.cache;
  cache.mode = mode;
  cache.revision = net.revision();
  cache.input = x;

  Rng rng(dropout_seed);
  const Matrix* a = &x;
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    const auto& spec = net.specs()[l];
    const auto& p = net.params(l);
    Matrix z = add_row_broadcast(matmul(*a, p.weights), p.biases);
    Matrix act = spec.activation == Activation::relu ? elementwise(z, relu) : z;
    std::optional<Matrix> mask;
    if (mode == Mode::train && spec.dropout_after > 0.0) {
      const double keep = 1.0 - spec.dropout_after;
      Matrix m(act.rows(), act.cols());
      for (double& v : m.data()) v = rng.uniform() < keep ? 1.0 / keep : 0.0;
      auto ad = act.data();
      auto md = m.data();
      for (std::size_t i = 0; i < ad.size(); ++i) ad[i] *= md[i];
      mask = std::move(m);
    }
    cache.pre.push_back(std::move(z));
    cache.post.push_back(std::move(act));
    cache.masks.push_back(std::move(mask));
    a = &cache.post.back();
  }
  const Matrix& last = cache.post.back();
  for (std::size_t i = 0; i < last.rows(); ++i) out.prediction[i] = last(i, 0);
  return out;
}

Vector predict(const Network& net, const Matrix& x) {
  if (x.cols() != net.input_dim())
    throw ShapeError("predict: input " + x.shape_string() + " but network expects " +
                     std::to_string(net.input_dim()) + " features");
  Matrix a = x;
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    const auto& p = net.params(l);
    a = add_row_broadcast(matmul(a, p.weights), p.biases);
    if (net.specs()[l].activation == Activation::relu) a = elementwise(a, relu);
  }
  Vector y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) y[i] = a(i, 0);
  return y;
}

double loss_mse(const Vector& pred, const Vector& target) {
  if (pred.size() != target.size() || pred.size() == 0)
    throw ShapeError("loss_mse: " + std::to_string(pred.size()) + " predictions vs " + std::to_string(target.size()) +
                     " targets");
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double e = target[i] - pred[i];
    s += e * e;
  }
  return s / static_cast<double>(pred.size());
}

double penalty(const Network& net, const RegConfig& reg) {
  double sq = 0.0;
  double abs = 0.0;
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    for (double w : net.params(l).weights.data()) {
      sq += w * w;
      abs += std::abs(w);
    }
  }
  return reg.l2 * sq + reg.l1 * abs;
}

BackwardResult backward(const Network& net, const ForwardCache& cache, const Vector& target, const RegConfig& reg,
                        LossKind loss) {
  if (cache.mode != Mode::train) throw ContractError("backward needs a train-mode forward cache");
  if (cache.revision != net.revision())
    throw ContractError("forward cache is stale: network parameters changed since the forward pass");
  if (cache.pre.size() != net.layer_count()) throw ContractError("forward cache belongs to a different network");
  const std::size_t n = cache.input.rows();
  if (target.size() != n)
    throw ShapeError("backward: " + std::to_string(target.size()) + " targets for a batch of " + std::to_string(n));

  BackwardResult out;
  out.grads.layers.resize(net.layer_count(), LayerParams{Matrix(1, 1), Vector()});

  // d(data loss)/d(output)
  const Matrix& output = cache.post.back();
  Matrix delta(n, 1);
  const double inv_n = 1.0 / static_cast<double>(n);
  double data_loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = output(i, 0) - target[i];
    if (loss == LossKind::mse) {
      data_loss += e * e;
      delta(i, 0) = 2.0 * e * inv_n;
    } else {
      data_loss += std::abs(e);
      delta(i, 0) = (e > 0.0 ? 1.0 : (e < 0.0 ? -1.0 : 0.0)) * inv_n;
    }
  }
  out.data_loss = data_loss * inv_n;

  // delta holds d(loss)/d(post[l]) on entry to each iteration.
  for (std::size_t l = net.layer_count(); l-- > 0;) {
    const auto& spec = net.specs()[l];
    if (cache.masks[l]) {
      auto dd = delta.data();
      auto md = cache.masks[l]->data();
      for (std::size_t i = 0; i < dd.size(); ++i) dd[i] *= md[i];
    }
    if (spec.activation == Activation::relu) {
      auto dd = delta.data();
      auto zd = cache.pre[l].data();
      for (std::size_t i = 0; i < dd.size(); ++i)
        if (!(zd[i] > 0.0)) dd[i] = 0.0;
    }
    const Matrix& a_prev = l == 0 ? cache.input : cache.post[l - 1];
    const auto& p = net.params(l);
    Matrix dw = matmul_tn(a_prev, delta);
    if (reg.l1 != 0.0 || reg.l2 != 0.0) {
      auto gd = dw.data();
      auto wd = p.weights.data();
      for (std::size_t i = 0; i < gd.size(); ++i) {
        const double w = wd[i];
        const double sign = w > 0.0 ? 1.0 : (w < 0.0 ? -1.0 : 0.0);
        gd[i] += 2.0 * reg.l2 * w + reg.l1 * sign;
      }
    }
    Vector db = column_sums(delta);
    if (l > 0) delta = matmul_nt(delta, p.weights);
    out.grads.layers[l] = {std::move(dw), std::move(db)};
  }
  out.loss = out.data_loss + penalty(net, reg);
  return out;
}

Vector predict_soc(const Network& net, const Normalizer& norm, std::span<const SampleRecord> raw) {
  if (!norm.fitted) throw ContractError("predict_soc needs a fitted normalizer");
  if (net.input_dim() != kFeatureCount)
    throw ContractError("network expects " + std::to_string(net.input_dim()) + " inputs, SOC features are 3");
  Vector y = predict(net, apply_normalizer(norm, raw));
  for (double& v : y.data()) v = std::clamp(v, 0.0, 100.0);
  return y;
}

}  // namespace socdfn
