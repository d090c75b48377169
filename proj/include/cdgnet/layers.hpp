#pragma once

// Parameterised layers. Each holds tensor handles that alias entries of a
// ParameterSet, so optimiser updates are visible to the layer directly.

#include <cstdint>
#include <string>
#include <vector>

#include "cdgnet/deform_conv.hpp"
#include "cdgnet/ops.hpp"
#include "cdgnet/params.hpp"

namespace cdg {

struct ConvSpec {
  int in = 1;
  int out = 1;
  int kh = 3;
  int kw = 3;
  int stride = 1;
  // Defaults to "same" padding (kernel/2) when negative.
  int pad_h = -1;
  int pad_w = -1;
  // Optional per-tap mask of kh*kw entries, broadcast over (out, in).
  std::vector<std::uint8_t> tap_mask;
  // Weights are drawn from U(+-gain * sqrt(3 / fan_in)): 1 keeps the variance of a
  // linear layer, kReluGain that of a layer feeding a ReLU.
  double gain = 1.0;
};

inline constexpr double kReluGain = 1.4142135623730951;

template <class T>
struct Conv {
  Tensor<T> weight;
  Tensor<T> bias;
  Conv2dGeometry geometry;

  static Conv make(ParamBuilder<T>& pb, const std::string& name, const ConvSpec& spec);
  Tensor<T> operator()(const Tensor<T>& x) const { return conv2d(x, weight, bias, geometry); }
};

/// Transposed convolution, kernel 4, stride 2, pad 1: exact 2x upsampling.
template <class T>
struct Upsample {
  Tensor<T> weight;  // (Cin, Cout, 4, 4)
  Tensor<T> bias;

  static Upsample make(ParamBuilder<T>& pb, const std::string& name, int in, int out);
  Tensor<T> operator()(const Tensor<T>& x) const { return conv_transpose2d(x, weight, bias, 2, 1); }
};

/// Deformable 3x3 conv whose offsets come from a zero-initialised 3x3 conv.
template <class T>
struct DeformConv {
  Conv<T> offset;
  Tensor<T> weight;
  Tensor<T> bias;

  static DeformConv make(ParamBuilder<T>& pb, const std::string& name, int in, int out,
                         double gain = 1.0);
  Tensor<T> operator()(const Tensor<T>& x) const {
    return deform_conv2d(x, offset(x), weight, bias);
  }
};

}  // namespace cdg
