#pragma once

// Differentiable primitives over NCHW tensors. Every function records a graph
// node when gradients are enabled and an input requires them.
//
// Weight layouts:
//   conv2d            w: (Cout, Cin, kh, kw)
//   conv_transpose2d  w: (Cin, Cout, kh, kw)
//   bias              any tensor holding Cout elements; may be undefined.

#include <vector>

#include "cdgnet/tensor.hpp"

namespace cdg {

struct Conv2dGeometry {
  int stride = 1;
  int pad_h = 0;
  int pad_w = 0;
};

/// Output extent of a strided convolution (floor division).
int conv_output_extent(int in, int kernel, int stride, int pad) noexcept;

/// Direct cross-correlation plus bias. Kernel extents must be odd.
template <class T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, Conv2dGeometry g);

template <class T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, int stride, int pad) {
  return conv2d(x, w, b, Conv2dGeometry{stride, pad, pad});
}

/// Adjoint of conv2d with the same stride/pad; output extent is
/// (H-1)*stride - 2*pad + kh. Any kernel extent, stride in {1, 2}.
template <class T>
Tensor<T> conv_transpose2d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, int stride,
                           int pad);

enum class Activation { kRelu, kSigmoid };

template <class T>
Tensor<T> activation(const Tensor<T>& x, Activation kind);
template <class T>
Tensor<T> relu(const Tensor<T>& x) {
  return activation(x, Activation::kRelu);
}
template <class T>
Tensor<T> sigmoid(const Tensor<T>& x) {
  return activation(x, Activation::kSigmoid);
}

/// (N,C,H,W) -> (N,C,1,1) per-channel mean.
template <class T>
Tensor<T> global_avg_pool(const Tensor<T>& x);

/// Concatenation along the channel axis.
template <class T>
Tensor<T> concat(const std::vector<Tensor<T>>& xs);

enum class Ewise { kMul, kAdd, kSub };

/// Elementwise op with broadcasting over singleton axes of either operand.
template <class T>
Tensor<T> ewise(const Tensor<T>& a, const Tensor<T>& b, Ewise kind);
template <class T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  return ewise(a, b, Ewise::kMul);
}
template <class T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  return ewise(a, b, Ewise::kAdd);
}
template <class T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  return ewise(a, b, Ewise::kSub);
}

template <class T>
Tensor<T> scale(const Tensor<T>& x, T factor);

/// Sum of all elements, shape (1,1,1,1).
template <class T>
Tensor<T> sum(const Tensor<T>& x);
template <class T>
Tensor<T> mean(const Tensor<T>& x);

/// mean((a-b)^2) over every element.
template <class T>
Tensor<T> mse_loss(const Tensor<T>& a, const Tensor<T>& b);

}  // namespace cdg
