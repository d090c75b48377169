#pragma once

// Composite blocks: residual block, residual dense block, and the two-map
// attention unit gating encoder features per branch.

#include <string>
#include <vector>

#include "cdgnet/layers.hpp"

namespace cdg {

/// x + conv(relu(conv(x))), 3x3 convolutions at constant width.
template <class T>
struct ResBlock {
  Conv<T> conv1;
  Conv<T> conv2;

  static ResBlock make(ParamBuilder<T>& pb, const std::string& name, int width);
  Tensor<T> operator()(const Tensor<T>& x) const;
};

/// Four densely connected 3x3 convs (growth width/2, ReLU after the first
/// three), a 1x1 fusion back to `width`, and a residual add.
template <class T>
struct Rdb {
  std::vector<Conv<T>> layers;
  Conv<T> fusion;

  static constexpr int kLayers = 4;
  static int growth(int width) { return width / 2 > 0 ? width / 2 : 1; }
  /// Input channel count of each dense layer.
  static std::vector<int> layer_inputs(int width);

  static Rdb make(ParamBuilder<T>& pb, const std::string& name, int width);
  Tensor<T> operator()(const Tensor<T>& x) const;
};

/// sigmoid(conv1x1(relu(conv1x1(avgpool(f))))) -> (N, C, 1, 1).
template <class T>
struct ChannelAttention {
  Conv<T> squeeze;
  Conv<T> excite;

  /// Throws ConfigError unless `channels` is divisible by `reduction`.
  static ChannelAttention make(ParamBuilder<T>& pb, const std::string& name, int channels,
                               int reduction);
  Tensor<T> operator()(const Tensor<T>& f) const;
};

/// 3x3 conv to C/4, two ResBlocks, a deformable conv, a 3x3 conv to one
/// channel, sigmoid -> (N, 1, H, W).
template <class T>
struct SpatialAttention {
  Conv<T> reduce;
  ResBlock<T> res1;
  ResBlock<T> res2;
  DeformConv<T> deform;
  Conv<T> project;

  static SpatialAttention make(ParamBuilder<T>& pb, const std::string& name, int channels);
  Tensor<T> operator()(const Tensor<T>& f) const;
};

template <class T>
struct AttentionResult {
  Tensor<T> features;  // f * mc * ms + f
  Tensor<T> channel_map;
  Tensor<T> spatial_map;
};

template <class T>
struct Acda {
  ChannelAttention<T> channel;
  SpatialAttention<T> spatial;

  static Acda make(ParamBuilder<T>& pb, const std::string& name, int channels, int reduction);
  AttentionResult<T> operator()(const Tensor<T>& f) const;
};

}  // namespace cdg
