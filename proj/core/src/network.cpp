#include "caries/network.hpp"

#include <cmath>

#include "caries/rng.hpp"

namespace caries {

void NetworkConfig::validate() const {
  if (depth < 1) throw ConfigError("network depth must be >= 1");
  if (base_channels < 1) throw ConfigError("base_channels must be >= 1");
  if (kernel_size < 1 || kernel_size % 2 == 0) throw ConfigError("kernel_size must be a positive odd integer");
  if (depth > 16 || (static_cast<long long>(base_channels) << depth) > (1LL << 20)) {
    throw ConfigError("network too large");
  }
}

void NetworkConfig::check_input(int height, int width) const {
  const int factor = 1 << depth;
  if (height < factor || width < factor || height % factor != 0 || width % factor != 0) {
    throw ShapeError("input " + std::to_string(width) + "x" + std::to_string(height) +
                     " is not divisible by 2^depth = " + std::to_string(factor));
  }
}

namespace {

// Layer index helpers for the fixed layer order:
//   enc{l}.conv0, enc{l}.conv1            l = 0 .. depth-1
//   mid.conv0, mid.conv1
//   dec{l}.up, dec{l}.conv0, dec{l}.conv1  l = depth-1 .. 0
//   head
struct Layout {
  int depth;
  int enc(int level, int j) const { return 2 * level + j; }
  int mid(int j) const { return 2 * depth + j; }
  int dec(int level, int j) const { return 2 * depth + 2 + 3 * (depth - 1 - level) + j; }
  int head() const { return 5 * depth + 2; }
  int count() const { return 5 * depth + 3; }
};

template <typename T>
ConvParams<T> make_layer(std::string name, int in_ch, int out_ch, int k) {
  return ConvParams<T>{std::move(name), BasicTensor<T>(Shape{out_ch, in_ch, k, k}),
                       std::vector<T>(static_cast<std::size_t>(out_ch), T{0}), (k - 1) / 2};
}

template <typename T>
BasicTensor<T> conv(const ConvParams<T>& p, const BasicTensor<T>& x) {
  return conv2d_forward<T>(x, p.weight, p.bias, p.padding);
}

}  // namespace

template <typename T>
BasicNetwork<T>::BasicNetwork(const NetworkConfig& config) : config_(config) {
  config_.validate();
  const int d = config_.depth;
  const int k = config_.kernel_size;
  auto ch = [&](int level) { return config_.base_channels << level; };
  for (int l = 0; l < d; ++l) {
    const std::string pre = "enc" + std::to_string(l);
    layers_.push_back(make_layer<T>(pre + ".conv0", l == 0 ? 1 : ch(l - 1), ch(l), k));
    layers_.push_back(make_layer<T>(pre + ".conv1", ch(l), ch(l), k));
  }
  layers_.push_back(make_layer<T>("mid.conv0", ch(d - 1), ch(d), k));
  layers_.push_back(make_layer<T>("mid.conv1", ch(d), ch(d), k));
  for (int l = d - 1; l >= 0; --l) {
    const std::string pre = "dec" + std::to_string(l);
    layers_.push_back(make_layer<T>(pre + ".up", ch(l + 1), ch(l), k));
    layers_.push_back(make_layer<T>(pre + ".conv0", 2 * ch(l), ch(l), k));
    layers_.push_back(make_layer<T>(pre + ".conv1", ch(l), ch(l), k));
  }
  layers_.push_back(make_layer<T>("head", ch(0), 1, 1));
}

template <typename T>
BasicNetwork<T>::BasicNetwork(const NetworkConfig& config, std::uint64_t seed) : BasicNetwork(config) {
  Rng rng(seed);
  for (auto& layer : layers_) {
    const Shape s = layer.weight.shape();
    const double bound = std::sqrt(6.0 / (static_cast<double>(s.c) * s.h * s.w));
    for (auto& v : layer.weight.data()) v = static_cast<T>(rng.uniform(-bound, bound));
  }
}

template <typename T>
BasicNetwork<T> BasicNetwork<T>::zeros(const NetworkConfig& config) {
  return BasicNetwork(config);
}

template <typename T>
std::size_t BasicNetwork<T>::parameter_count() const {
  std::size_t total = 0;
  for (const auto& l : layers_) total += l.weight.size() + l.bias.size();
  return total;
}

template <typename T>
BasicTensor<T> BasicNetwork<T>::forward(const BasicTensor<T>& input) const {
  ForwardCache<T> cache;
  return forward(input, cache);
}

template <typename T>
BasicTensor<T> BasicNetwork<T>::forward(const BasicTensor<T>& input, ForwardCache<T>& cache) const {
  if (input.shape().c != 1) throw ShapeError("network expects a single input channel");
  config_.check_input(input.shape().h, input.shape().w);
  const Layout at{config_.depth};
  cache.conv_inputs.assign(static_cast<std::size_t>(at.count()), BasicTensor<T>{});
  cache.conv_outputs.assign(static_cast<std::size_t>(at.count()), BasicTensor<T>{});

  auto run = [&](int idx, BasicTensor<T> x, bool relu) {
    BasicTensor<T> z = conv(layers_[static_cast<std::size_t>(idx)], x);
    cache.conv_inputs[static_cast<std::size_t>(idx)] = std::move(x);
    BasicTensor<T> a = relu ? activation_forward(z, Activation::relu) : z;
    cache.conv_outputs[static_cast<std::size_t>(idx)] = std::move(z);
    return a;
  };

  std::vector<BasicTensor<T>> skips;
  BasicTensor<T> x = input;
  for (int l = 0; l < config_.depth; ++l) {
    x = run(at.enc(l, 0), std::move(x), true);
    x = run(at.enc(l, 1), std::move(x), true);
    skips.push_back(x);
    x = maxpool2x2_forward(x);
  }
  x = run(at.mid(0), std::move(x), true);
  x = run(at.mid(1), std::move(x), true);
  for (int l = config_.depth - 1; l >= 0; --l) {
    x = run(at.dec(l, 0), upsample2x_forward(x), true);
    x = run(at.dec(l, 1), concat_channels(x, skips[static_cast<std::size_t>(l)]), true);
    x = run(at.dec(l, 2), std::move(x), true);
  }
  return run(at.head(), std::move(x), false);
}

template <typename T>
NetworkGradients<T> BasicNetwork<T>::backward(const ForwardCache<T>& cache,
                                              const BasicTensor<T>& logit_grad) const {
  const Layout at{config_.depth};
  if (cache.conv_inputs.size() != static_cast<std::size_t>(at.count())) {
    throw ShapeError("forward cache does not belong to this network");
  }
  NetworkGradients<T> grads(layers_.size());

  // Back through conv `idx`; `g` is d(loss)/d(conv output, pre-activation).
  auto back = [&](int idx, const BasicTensor<T>& g, bool need_input) {
    const auto i = static_cast<std::size_t>(idx);
    ConvGradients<T> cg = conv2d_backward<T>(cache.conv_inputs[i], layers_[i].weight, g,
                                             layers_[i].padding, need_input);
    grads[i] = ConvParamGrads<T>{std::move(cg.weight_grad), std::move(cg.bias_grad)};
    return std::move(cg.input_grad);
  };
  auto relu_back = [&](int idx, const BasicTensor<T>& g) {
    return activation_backward(cache.conv_outputs[static_cast<std::size_t>(idx)], g, Activation::relu);
  };

  std::vector<BasicTensor<T>> skip_grads(static_cast<std::size_t>(config_.depth));
  BasicTensor<T> g = back(at.head(), logit_grad, true);
  for (int l = 0; l < config_.depth; ++l) {
    g = back(at.dec(l, 2), relu_back(at.dec(l, 2), g), true);
    g = back(at.dec(l, 1), relu_back(at.dec(l, 1), g), true);
    auto [g_up, g_skip] = split_channels(g, config_.base_channels << l);
    skip_grads[static_cast<std::size_t>(l)] = std::move(g_skip);
    g = back(at.dec(l, 0), relu_back(at.dec(l, 0), g_up), true);
    g = upsample2x_backward(g);
  }
  g = back(at.mid(1), relu_back(at.mid(1), g), true);
  g = back(at.mid(0), relu_back(at.mid(0), g), true);
  for (int l = config_.depth - 1; l >= 0; --l) {
    // Pool input is the post-relu output of enc{l}.conv1.
    const BasicTensor<T> pooled_from =
        activation_forward(cache.conv_outputs[static_cast<std::size_t>(at.enc(l, 1))], Activation::relu);
    g = maxpool2x2_backward(pooled_from, g);
    const auto& sg = skip_grads[static_cast<std::size_t>(l)];
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += sg[i];
    g = back(at.enc(l, 1), relu_back(at.enc(l, 1), g), true);
    g = back(at.enc(l, 0), relu_back(at.enc(l, 0), g), l > 0);
  }
  return grads;
}

Tensor image_to_tensor(const GrayImage& image) {
  Tensor t(Shape{1, 1, image.height(), image.width()});
  const auto px = image.data();
  for (std::size_t i = 0; i < px.size(); ++i) t[i] = static_cast<float>(px[i]) / 255.0f;
  return t;
}

template class BasicNetwork<float>;
template class BasicNetwork<double>;

}  // namespace caries
