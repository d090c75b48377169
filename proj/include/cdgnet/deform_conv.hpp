#pragma once

// Deformable 3x3 convolution (stride 1, pad 1) with bilinear sampling.
//
// Offsets have shape (N, 18, H, W). Channel 2k holds dy and 2k+1 holds dx
// for tap k, taps numbered row-major over the 3x3 window. Samples that fall
// outside the image read zero.

#include "cdgnet/ops.hpp"
#include "cdgnet/tensor.hpp"

namespace cdg {

inline constexpr int kDeformTaps = 9;
inline constexpr int kOffsetChannels = 2 * kDeformTaps;

template <class T>
struct BilinearSample {
  T value = T(0);
  T d_y = T(0);  // partial derivative w.r.t. the row coordinate
  T d_x = T(0);
};

/// Samples plane (n, c) of `feat` at real coordinates (y, x).
template <class T>
BilinearSample<T> bilinear_sample(const Tensor<T>& feat, T y, T x, int n, int c);

/// Raw-plane form used by the kernels.
template <class T>
BilinearSample<T> bilinear_sample(const T* plane, int height, int width, T y, T x);

/// out(p) = b + sum_k w_k * x(p + p_k + offset_k(p)). Differentiable in all
/// four arguments; `b` may be undefined.
template <class T>
Tensor<T> deform_conv2d(const Tensor<T>& x, const Tensor<T>& offsets, const Tensor<T>& w,
                        const Tensor<T>& b);

}  // namespace cdg
