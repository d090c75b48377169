#include "cdgnet/blocks.hpp"

#include "cdgnet/errors.hpp"

namespace cdg {

namespace {

// Residual branches start small so stacked blocks begin near the identity.
constexpr double kResidualGain = 0.1;

ConvSpec conv3(int in, int out, double gain = 1.0) {
  ConvSpec s{in, out, 3, 3};
  s.gain = gain;
  return s;
}
ConvSpec conv1(int in, int out, double gain = 1.0) {
  ConvSpec s{in, out, 1, 1};
  s.gain = gain;
  return s;
}

}  // namespace

template <class T>
ResBlock<T> ResBlock<T>::make(ParamBuilder<T>& pb, const std::string& name, int width) {
  auto b = pb.scoped(name);
  return ResBlock{Conv<T>::make(b, "conv1", conv3(width, width, kReluGain)),
                  Conv<T>::make(b, "conv2", conv3(width, width, kResidualGain))};
}

template <class T>
Tensor<T> ResBlock<T>::operator()(const Tensor<T>& x) const {
  return add(x, conv2(relu(conv1(x))));
}

template <class T>
std::vector<int> Rdb<T>::layer_inputs(int width) {
  std::vector<int> in;
  for (int i = 0; i < kLayers; ++i) in.push_back(width + i * growth(width));
  return in;
}

template <class T>
Rdb<T> Rdb<T>::make(ParamBuilder<T>& pb, const std::string& name, int width) {
  auto b = pb.scoped(name);
  Rdb r;
  const int g = growth(width);
  for (int i = 0; i < kLayers; ++i) {
    const double gain = i + 1 < kLayers ? kReluGain : 1.0;
    r.layers.push_back(Conv<T>::make(b, "dense" + std::to_string(i), conv3(width + i * g, g, gain)));
  }
  r.fusion = Conv<T>::make(b, "fusion", conv1(width + kLayers * g, width, kResidualGain));
  return r;
}

template <class T>
Tensor<T> Rdb<T>::operator()(const Tensor<T>& x) const {
  std::vector<Tensor<T>> features{x};
  for (int i = 0; i < kLayers; ++i) {
    Tensor<T> y = layers[i](features.size() == 1 ? x : concat(features));
    if (i + 1 < kLayers) y = relu(y);
    features.push_back(y);
  }
  return add(x, fusion(concat(features)));
}

template <class T>
ChannelAttention<T> ChannelAttention<T>::make(ParamBuilder<T>& pb, const std::string& name,
                                              int channels, int reduction) {
  if (reduction < 1 || channels % reduction != 0)
    throw ConfigError("channel attention: channels (" + std::to_string(channels) +
                      ") must be divisible by reduction_ratio (" + std::to_string(reduction) +
                      ")");
  auto b = pb.scoped(name);
  const int hidden = channels / reduction;
  return ChannelAttention{Conv<T>::make(b, "squeeze", conv1(channels, hidden, kReluGain)),
                          Conv<T>::make(b, "excite", conv1(hidden, channels))};
}

template <class T>
Tensor<T> ChannelAttention<T>::operator()(const Tensor<T>& f) const {
  return sigmoid(excite(relu(squeeze(global_avg_pool(f)))));
}

template <class T>
SpatialAttention<T> SpatialAttention<T>::make(ParamBuilder<T>& pb, const std::string& name,
                                              int channels) {
  if (channels % 4 != 0)
    throw ConfigError("spatial attention: channels (" + std::to_string(channels) +
                      ") must be divisible by 4");
  auto b = pb.scoped(name);
  const int inner = channels / 4;
  SpatialAttention s;
  s.reduce = Conv<T>::make(b, "reduce", conv3(channels, inner));
  s.res1 = ResBlock<T>::make(b, "res1", inner);
  s.res2 = ResBlock<T>::make(b, "res2", inner);
  s.deform = DeformConv<T>::make(b, "deform", inner, inner);
  s.project = Conv<T>::make(b, "project", conv3(inner, 1));
  return s;
}

template <class T>
Tensor<T> SpatialAttention<T>::operator()(const Tensor<T>& f) const {
  return sigmoid(project(deform(res2(res1(reduce(f))))));
}

template <class T>
Acda<T> Acda<T>::make(ParamBuilder<T>& pb, const std::string& name, int channels, int reduction) {
  auto b = pb.scoped(name);
  return Acda{ChannelAttention<T>::make(b, "channel", channels, reduction),
              SpatialAttention<T>::make(b, "spatial", channels)};
}

template <class T>
AttentionResult<T> Acda<T>::operator()(const Tensor<T>& f) const {
  AttentionResult<T> r;
  r.channel_map = channel(f);
  const Tensor<T> scaled = mul(f, r.channel_map);
  r.spatial_map = spatial(scaled);
  r.features = add(mul(scaled, r.spatial_map), f);
  return r;
}

template struct ResBlock<float>;
template struct ResBlock<double>;
template struct Rdb<float>;
template struct Rdb<double>;
template struct ChannelAttention<float>;
template struct ChannelAttention<double>;
template struct SpatialAttention<float>;
template struct SpatialAttention<double>;
template struct Acda<float>;
template struct Acda<double>;

}  // namespace cdg
