#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include "medirl/error.hpp"
#include "medirl/random.hpp"

namespace medirl {

enum class Activation : std::uint32_t { relu = 0, leaky_relu = 1, linear = 2 };

struct LayerSpec {
  std::size_t input_width = 1;
  std::size_t output_width = 1;
  Activation activation = Activation::linear;
  double alpha = 0.01;  // negative slope, leaky_relu only

  bool operator==(const LayerSpec&) const = default;
};

inline double activate(Activation act, double alpha, double x) {
  switch (act) {
    case Activation::relu: return x > 0.0 ? x : 0.0;
    case Activation::leaky_relu: return x > 0.0 ? x : alpha * x;
    case Activation::linear: return x;
  }
  return x;
}

inline double activate_derivative(Activation act, double alpha, double x) {
  switch (act) {
    case Activation::relu: return x > 0.0 ? 1.0 : 0.0;
    case Activation::leaky_relu: return x > 0.0 ? 1.0 : alpha;
    case Activation::linear: return 1.0;
  }
  return 1.0;
}

inline void validate_layers(const std::vector<LayerSpec>& layers) {
  if (layers.empty()) fail(ErrorCode::width_mismatch, "network needs at least one layer");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const LayerSpec& ls = layers[l];
    if (ls.input_width < 1 || ls.output_width < 1)
      fail(ErrorCode::width_mismatch, "layer " + std::to_string(l) + " has zero width");
    if (l > 0 && layers[l - 1].output_width != ls.input_width)
      fail(ErrorCode::width_mismatch, "layer " + std::to_string(l) + " input width " +
                                          std::to_string(ls.input_width) + " != previous output width " +
                                          std::to_string(layers[l - 1].output_width));
    if (ls.activation == Activation::leaky_relu && !(ls.alpha > 0.0 && ls.alpha < 1.0))
      fail(ErrorCode::width_mismatch, "leaky_relu alpha must lie in (0, 1)");
  }
  if (layers.back().output_width != 1) fail(ErrorCode::width_mismatch, "final layer must have output width 1");
  if (layers.back().activation != Activation::linear)
    fail(ErrorCode::width_mismatch, "final layer must be linear");
}

/// Activations retained by a forward pass. `inputs[l]` is the input of
/// layer l and `pre[l]` its pre-activation.
struct ForwardTape {
  std::vector<std::vector<double>> inputs;
  std::vector<std::vector<double>> pre;
  bool valid = false;
};

/// Fully connected reward model phi -> R. Parameters live in one flat
/// buffer, per layer: weights (output x input, row-major) then biases.
/// Gradients use the same layout.
class RewardNetwork {
 public:
  RewardNetwork() = default;

  explicit RewardNetwork(std::vector<LayerSpec> layers) : layers_(std::move(layers)) {
    validate_layers(layers_);
    std::size_t off = 0;
    for (const LayerSpec& ls : layers_) {
      offsets_.push_back(off);
      off += ls.input_width * ls.output_width + ls.output_width;
    }
    params_.assign(off, 0.0);
  }

  const std::vector<LayerSpec>& layers() const noexcept { return layers_; }
  std::size_t input_width() const { return layers_.front().input_width; }
  std::size_t parameter_count() const noexcept { return params_.size(); }
  std::span<double> params() noexcept { return params_; }
  std::span<const double> params() const noexcept { return params_; }

  std::span<double> weights(std::size_t l) {
    return {params_.data() + offsets_.at(l), layers_[l].input_width * layers_[l].output_width};
  }
  std::span<double> biases(std::size_t l) {
    const LayerSpec& ls = layers_.at(l);
    return {params_.data() + offsets_[l] + ls.input_width * ls.output_width, ls.output_width};
  }

  double forward(std::span<const double> phi) const {
    check_input(phi);
    std::vector<double> cur(phi.begin(), phi.end());
    std::vector<double> next;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      affine(l, cur, next);
      const LayerSpec& ls = layers_[l];
      for (double& v : next) v = activate(ls.activation, ls.alpha, v);
      cur.swap(next);
    }
    return cur[0];
  }

  double forward(std::span<const double> phi, ForwardTape& tape) const {
    check_input(phi);
    tape.inputs.resize(layers_.size());
    tape.pre.resize(layers_.size());
    tape.inputs[0].assign(phi.begin(), phi.end());
    double out = 0.0;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      affine(l, tape.inputs[l], tape.pre[l]);
      const LayerSpec& ls = layers_[l];
      if (l + 1 < layers_.size()) {
        std::vector<double>& dst = tape.inputs[l + 1];
        dst.resize(ls.output_width);
        for (std::size_t j = 0; j < ls.output_width; ++j) dst[j] = activate(ls.activation, ls.alpha, tape.pre[l][j]);
      } else {
        out = activate(ls.activation, ls.alpha, tape.pre[l][0]);
      }
    }
    tape.valid = true;
    return out;
  }

  /// Adds upstream * dR/dtheta for the retained forward pass into `grad`.
  void accumulate_gradient(const ForwardTape& tape, double upstream, std::span<double> grad) const {
    if (!tape.valid || tape.pre.size() != layers_.size())
      fail(ErrorCode::no_retained_forward, "backward called without a retained forward pass");
    if (grad.size() != params_.size()) fail(ErrorCode::dimension_mismatch, "gradient buffer has wrong length");
    if (upstream == 0.0) return;

    std::vector<double> delta{upstream};
    std::vector<double> below;
    for (std::size_t l = layers_.size(); l-- > 0;) {
      const LayerSpec& ls = layers_[l];
      const std::vector<double>& x = tape.inputs[l];
      for (std::size_t j = 0; j < ls.output_width; ++j)
        delta[j] *= activate_derivative(ls.activation, ls.alpha, tape.pre[l][j]);

      double* gw = grad.data() + offsets_[l];
      double* gb = gw + ls.input_width * ls.output_width;
      for (std::size_t j = 0; j < ls.output_width; ++j) {
        const double dj = delta[j];
        if (dj == 0.0) continue;
        double* row = gw + j * ls.input_width;
        for (std::size_t i = 0; i < ls.input_width; ++i) row[i] += dj * x[i];
        gb[j] += dj;
      }
      if (l == 0) break;
      const double* w = params_.data() + offsets_[l];
      below.assign(ls.input_width, 0.0);
      for (std::size_t j = 0; j < ls.output_width; ++j) {
        const double dj = delta[j];
        if (dj == 0.0) continue;
        const double* row = w + j * ls.input_width;
        for (std::size_t i = 0; i < ls.input_width; ++i) below[i] += dj * row[i];
      }
      delta.swap(below);
    }
  }

 private:
  void check_input(std::span<const double> phi) const {
    if (layers_.empty()) fail(ErrorCode::width_mismatch, "network has no layers");
    if (phi.size() != layers_.front().input_width)
      fail(ErrorCode::dimension_mismatch, "feature length " + std::to_string(phi.size()) + " != input width " +
                                              std::to_string(layers_.front().input_width));
    for (double v : phi)
      if (!std::isfinite(v)) fail(ErrorCode::non_finite_input, "feature vector contains a non-finite entry");
  }

  void affine(std::size_t l, const std::vector<double>& x, std::vector<double>& out) const {
    const LayerSpec& ls = layers_[l];
    const double* w = params_.data() + offsets_[l];
    const double* b = w + ls.input_width * ls.output_width;
    out.resize(ls.output_width);
    for (std::size_t j = 0; j < ls.output_width; ++j) {
      const double* row = w + j * ls.input_width;
      double acc = b[j];
      for (std::size_t i = 0; i < ls.input_width; ++i) acc += row[i] * x[i];
      out[j] = acc;
    }
  }

  std::vector<LayerSpec> layers_;
  std::vector<std::size_t> offsets_;
  std::vector<double> params_;
};

using Gradients = std::vector<double>;

/// Weights uniform in +-sqrt(6 / (fan_in + fan_out)), biases zero. The
/// draw order is layer by layer, row-major, from Rng(seed).
inline RewardNetwork init_network(std::vector<LayerSpec> layers, std::uint64_t seed) {
  RewardNetwork net(std::move(layers));
  Rng rng(seed);
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    const LayerSpec& ls = net.layers()[l];
    const double limit = std::sqrt(6.0 / static_cast<double>(ls.input_width + ls.output_width));
    for (double& w : net.weights(l)) w = rng.uniform(-limit, limit);
  }
  return net;
}

inline void add_weight_decay(const RewardNetwork& net, double weight_decay, std::span<double> grad) {
  if (weight_decay == 0.0) return;
  const auto theta = net.params();
  for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += weight_decay * theta[i];
}

/// dL/dtheta for L = upstream * R(phi) + weight_decay * |theta|^2 / 2.
inline Gradients backward(const RewardNetwork& net, const ForwardTape& tape, double upstream,
                          double weight_decay = 0.0) {
  Gradients grad(net.parameter_count(), 0.0);
  net.accumulate_gradient(tape, upstream, grad);
  add_weight_decay(net, weight_decay, grad);
  return grad;
}

struct AdamState {
  std::uint64_t step = 0;
  std::vector<double> m;
  std::vector<double> v;
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  /// Gaussian prior strength; applied by whoever assembles the gradient
  /// (see add_weight_decay), never inside adam_step.
  double weight_decay = 1e-4;

  static AdamState for_network(const RewardNetwork& net, double lr = 0.001, double weight_decay = 1e-4) {
    AdamState s;
    s.m.assign(net.parameter_count(), 0.0);
    s.v.assign(net.parameter_count(), 0.0);
    s.lr = lr;
    s.weight_decay = weight_decay;
    return s;
  }
};

/// Bias-corrected Adam update. Refuses non-finite gradients and leaves
/// both the network and the optimizer state untouched in that case.
inline void adam_step(RewardNetwork& net, std::span<const double> grad, AdamState& opt) {
  const std::size_t n = net.parameter_count();
  if (grad.size() != n || opt.m.size() != n || opt.v.size() != n)
    fail(ErrorCode::dimension_mismatch, "gradient or moment shape does not match the network");
  for (std::size_t i = 0; i < n; ++i)
    if (!std::isfinite(grad[i]))
      fail(ErrorCode::non_finite_gradient, "gradient entry " + std::to_string(i) + " is not finite");

  ++opt.step;
  const double t = static_cast<double>(opt.step);
  const double c1 = 1.0 - std::pow(opt.beta1, t);
  const double c2 = 1.0 - std::pow(opt.beta2, t);
  auto theta = net.params();
  for (std::size_t i = 0; i < n; ++i) {
    opt.m[i] = opt.beta1 * opt.m[i] + (1.0 - opt.beta1) * grad[i];
    opt.v[i] = opt.beta2 * opt.v[i] + (1.0 - opt.beta2) * grad[i] * grad[i];
    const double mhat = opt.m[i] / c1;
    const double vhat = opt.v[i] / c2;
    theta[i] -= opt.lr * mhat / (std::sqrt(vhat) + opt.eps);
  }
  for (std::size_t i = 0; i < n; ++i)
    if (!std::isfinite(theta[i]))
      fail(ErrorCode::non_finite_gradient, "parameter " + std::to_string(i) + " became non-finite");
}

// Model file layout, all integers and doubles little-endian:
//   char[8]  magic "MEDIRLNN"
//   u32      format version (kModelFormatVersion)
//   u32      layer count L
//   L x { u32 input_width, u32 output_width, u32 activation, f64 alpha }
//   u64      parameter count P
//   P x f64  parameters in network order
inline constexpr char kModelMagic[8] = {'M', 'E', 'D', 'I', 'R', 'L', 'N', 'N'};
inline constexpr std::uint32_t kModelFormatVersion = 1;

namespace detail {

template <class T>
void put_le(std::string& buf, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  buf.append(reinterpret_cast<const char*>(bytes), sizeof(T));
}

class ByteReader {
 public:
  explicit ByteReader(std::string data) : data_(std::move(data)) {}

  template <class T>
  T get() {
    if (pos_ + sizeof(T) > data_.size()) fail(ErrorCode::corrupt_file, "model file is truncated");
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, data_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    pos_ += sizeof(T);
    T value;
    std::memcpy(&value, bytes, sizeof(T));
    return value;
  }

  std::string_view take(std::size_t n) {
    if (pos_ + n > data_.size()) fail(ErrorCode::corrupt_file, "model file is truncated");
    std::string_view out(data_.data() + pos_, n);
    pos_ += n;
    return out;
  }

  bool at_end() const { return pos_ == data_.size(); }

 private:
  std::string data_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::string serialize_model(const RewardNetwork& net) {
  std::string buf(kModelMagic, sizeof(kModelMagic));
  detail::put_le<std::uint32_t>(buf, kModelFormatVersion);
  detail::put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(net.layers().size()));
  for (const LayerSpec& ls : net.layers()) {
    detail::put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(ls.input_width));
    detail::put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(ls.output_width));
    detail::put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(ls.activation));
    detail::put_le<double>(buf, ls.alpha);
  }
  detail::put_le<std::uint64_t>(buf, net.parameter_count());
  for (double p : net.params()) detail::put_le<double>(buf, p);
  return buf;
}

inline RewardNetwork deserialize_model(std::string bytes) {
  detail::ByteReader in(std::move(bytes));
  if (in.take(sizeof(kModelMagic)) != std::string_view(kModelMagic, sizeof(kModelMagic)))
    fail(ErrorCode::corrupt_file, "bad magic, not a model file");
  const auto version = in.get<std::uint32_t>();
  if (version != kModelFormatVersion)
    fail(ErrorCode::corrupt_file, "unsupported model format version " + std::to_string(version) + " (expected " +
                                      std::to_string(kModelFormatVersion) + ")");
  const auto count = in.get<std::uint32_t>();
  if (count == 0 || count > 1024) fail(ErrorCode::corrupt_file, "implausible layer count");
  std::vector<LayerSpec> layers(count);
  for (LayerSpec& ls : layers) {
    ls.input_width = in.get<std::uint32_t>();
    ls.output_width = in.get<std::uint32_t>();
    const auto act = in.get<std::uint32_t>();
    if (act > 2) fail(ErrorCode::corrupt_file, "unknown activation code " + std::to_string(act));
    ls.activation = static_cast<Activation>(act);
    ls.alpha = in.get<double>();
  }
  RewardNetwork net;
  try {
    net = RewardNetwork(std::move(layers));
  } catch (const Error& e) {
    fail(ErrorCode::corrupt_file, std::string("invalid layer table: ") + e.what());
  }
  const auto n = in.get<std::uint64_t>();
  if (n != net.parameter_count())
    fail(ErrorCode::corrupt_file, "parameter count " + std::to_string(n) + " does not match layer table");
  for (double& p : net.params()) {
    p = in.get<double>();
    if (!std::isfinite(p)) fail(ErrorCode::corrupt_file, "non-finite parameter");
  }
  if (!in.at_end()) fail(ErrorCode::corrupt_file, "trailing bytes after parameters");
  return net;
}

inline void save_model(const RewardNetwork& net, const std::string& path) {
  const std::string bytes = serialize_model(net);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::io_error, "cannot open " + path + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::io_error, "write failed for " + path);
}

inline RewardNetwork load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io_error, "cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_model(std::move(bytes));
}

}  // namespace medirl
