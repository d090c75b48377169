#include "cdgnet/ops.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "cdgnet/errors.hpp"
#include "cdgnet/kernels.hpp"

namespace cdg {

namespace {

using detail::TensorImpl;

// Output columns [lo, hi) whose input column ox*stride - pad + kj is inside [0, width).
std::pair<int, int> valid_range(int out_w, int width, int stride, int pad, int kj) {
  const int shift = pad - kj;  // ix = ox*stride - shift
  int lo = shift > 0 ? (shift + stride - 1) / stride : 0;
  int hi = (width - 1 + shift) >= 0 ? (width - 1 + shift) / stride + 1 : 0;
  lo = std::min(lo, out_w);
  hi = std::clamp(hi, lo, out_w);
  return {lo, hi};
}

// Lowers one image (C,H,W) to columns (C*kh*kw, Ho*Wo).
template <class T>
void im2col(const T* x, int channels, int height, int width, int kh, int kw, int stride, int ph,
            int pw, int out_h, int out_w, T* col) {
  const std::size_t cols = static_cast<std::size_t>(out_h) * out_w;
  for (int c = 0; c < channels; ++c) {
    const T* plane = x + static_cast<std::size_t>(c) * height * width;
    for (int ki = 0; ki < kh; ++ki) {
      for (int kj = 0; kj < kw; ++kj) {
        T* row = col + (static_cast<std::size_t>(c * kh + ki) * kw + kj) * cols;
        for (int oy = 0; oy < out_h; ++oy) {
          const int iy = oy * stride - ph + ki;
          T* dst = row + static_cast<std::size_t>(oy) * out_w;
          if (iy < 0 || iy >= height) {
            std::fill(dst, dst + out_w, T(0));
            continue;
          }
          const T* src = plane + static_cast<std::size_t>(iy) * width;
          const auto [lo, hi] = valid_range(out_w, width, stride, pw, kj);
          std::fill(dst, dst + lo, T(0));
          if (stride == 1) {
            std::copy(src + lo - pw + kj, src + hi - pw + kj, dst + lo);
          } else {
            for (int ox = lo; ox < hi; ++ox) dst[ox] = src[ox * stride - pw + kj];
          }
          std::fill(dst + hi, dst + out_w, T(0));
        }
      }
    }
  }
}

// Adjoint of im2col: accumulates columns back into the image.
template <class T>
void col2im(const T* col, int channels, int height, int width, int kh, int kw, int stride, int ph,
            int pw, int out_h, int out_w, T* x) {
  const std::size_t cols = static_cast<std::size_t>(out_h) * out_w;
  for (int c = 0; c < channels; ++c) {
    T* plane = x + static_cast<std::size_t>(c) * height * width;
    for (int ki = 0; ki < kh; ++ki) {
      for (int kj = 0; kj < kw; ++kj) {
        const T* row = col + (static_cast<std::size_t>(c * kh + ki) * kw + kj) * cols;
        for (int oy = 0; oy < out_h; ++oy) {
          const int iy = oy * stride - ph + ki;
          if (iy < 0 || iy >= height) continue;
          const T* src = row + static_cast<std::size_t>(oy) * out_w;
          T* dst = plane + static_cast<std::size_t>(iy) * width;
          const auto [lo, hi] = valid_range(out_w, width, stride, pw, kj);
          for (int ox = lo; ox < hi; ++ox) dst[ox * stride - pw + kj] += src[ox];
        }
      }
    }
  }
}

template <class T>
void check_bias(const Tensor<T>& b, int channels, const char* op) {
  if (b.defined() && static_cast<int>(b.numel()) != channels)
    throw DimensionError("bias", std::string(op) + ": bias holds " + std::to_string(b.numel()) +
                                     " values, expected " + std::to_string(channels));
}

const char* axis_name(int axis) {
  static const char* names[] = {"batch", "channel", "height", "width"};
  return names[axis];
}

std::array<int, 4> extents(const Shape& s) { return {s.n, s.c, s.h, s.w}; }

}  // namespace

int conv_output_extent(int in, int kernel, int stride, int pad) noexcept {
  return (in + 2 * pad - kernel) / stride + 1;
}

// ---------------------------------------------------------------- conv2d

template <class T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, Conv2dGeometry g) {
  const Shape xs = x.shape();
  const Shape ws = w.shape();
  if (g.stride < 1 || g.pad_h < 0 || g.pad_w < 0)
    throw ContractError("conv2d: stride must be >= 1 and padding >= 0");
  if (ws.h % 2 == 0 || ws.w % 2 == 0)
    throw DimensionError("kernel", "conv2d: kernel extents must be odd, got " +
                                       std::to_string(ws.h) + "x" + std::to_string(ws.w));
  if (ws.c != xs.c)
    throw DimensionError("channel", "conv2d: input has " + std::to_string(xs.c) +
                                        " channels, weight expects " + std::to_string(ws.c));
  check_bias(b, ws.n, "conv2d");
  const int out_h = conv_output_extent(xs.h, ws.h, g.stride, g.pad_h);
  const int out_w = conv_output_extent(xs.w, ws.w, g.stride, g.pad_w);
  if (out_h < 1) throw DimensionError("height", "conv2d: input height too small for kernel");
  if (out_w < 1) throw DimensionError("width", "conv2d: input width too small for kernel");

  const int cout = ws.n;
  const int k = ws.c * ws.h * ws.w;
  const int cols = out_h * out_w;
  const bool pointwise = ws.h == 1 && ws.w == 1 && g.stride == 1 && g.pad_h == 0 && g.pad_w == 0;
  const Shape os{xs.n, cout, out_h, out_w};

  std::vector<T> out(os.numel());
  std::vector<T> col(pointwise ? 0 : static_cast<std::size_t>(k) * cols);
  const T* xd = x.data().data();
  const T* wd = w.data().data();
  for (int n = 0; n < xs.n; ++n) {
    const T* xn = xd + static_cast<std::size_t>(n) * xs.c * xs.plane();
    const T* src = xn;
    if (!pointwise) {
      im2col(xn, xs.c, xs.h, xs.w, ws.h, ws.w, g.stride, g.pad_h, g.pad_w, out_h, out_w, col.data());
      src = col.data();
    }
    T* on = out.data() + static_cast<std::size_t>(n) * cout * cols;
    kernels::gemm_nn(cout, cols, k, wd, k, src, cols, on, cols, false);
    if (b.defined()) {
      const T* bd = b.data().data();
      for (int o = 0; o < cout; ++o) {
        T* row = on + static_cast<std::size_t>(o) * cols;
        for (int p = 0; p < cols; ++p) row[p] += bd[o];
      }
    }
  }

  auto xi = x.impl();
  auto wi = w.impl();
  auto bi = b.defined() ? b.impl() : nullptr;
  return detail::make_output<T>(
      os, std::move(out), {x, w, b}, "conv2d",
      [xi, wi, bi, g, xs, ws, out_h, out_w, pointwise](const TensorImpl<T>& o) {
        const int cout = ws.n;
        const int k = ws.c * ws.h * ws.w;
        const int cols = out_h * out_w;
        const T* gy = o.grad.data();
        std::vector<T> col(pointwise ? 0 : static_cast<std::size_t>(k) * cols);
        std::vector<T> dcol(static_cast<std::size_t>(k) * cols);
        T* gw = wi->requires_grad ? wi->grad_buffer().data() : nullptr;
        T* gb = bi && bi->requires_grad ? bi->grad_buffer().data() : nullptr;
        T* gx = xi->requires_grad ? xi->grad_buffer().data() : nullptr;
        for (int n = 0; n < xs.n; ++n) {
          const T* gyn = gy + static_cast<std::size_t>(n) * cout * cols;
          const T* xn = xi->data.data() + static_cast<std::size_t>(n) * xs.c * xs.plane();
          if (gw) {
            const T* src = xn;
            if (!pointwise) {
              im2col(xn, xs.c, xs.h, xs.w, ws.h, ws.w, g.stride, g.pad_h, g.pad_w, out_h, out_w,
                     col.data());
              src = col.data();
            }
            kernels::gemm_nt(cout, k, cols, gyn, cols, src, cols, gw, k, true);
          }
          if (gb)
            for (int c = 0; c < cout; ++c)
              gb[c] += kernels::sum(static_cast<std::size_t>(cols),
                                    gyn + static_cast<std::size_t>(c) * cols);
          if (gx) {
            T* gxn = gx + static_cast<std::size_t>(n) * xs.c * xs.plane();
            if (pointwise) {
              kernels::gemm_tn(k, cols, cout, wi->data.data(), k, gyn, cols, gxn, cols, true);
            } else {
              kernels::gemm_tn(k, cols, cout, wi->data.data(), k, gyn, cols, dcol.data(), cols,
                               false);
              col2im(dcol.data(), xs.c, xs.h, xs.w, ws.h, ws.w, g.stride, g.pad_h, g.pad_w, out_h,
                     out_w, gxn);
            }
          }
        }
      });
}

// ------------------------------------------------------- conv_transpose2d

template <class T>
Tensor<T> conv_transpose2d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, int stride,
                           int pad) {
  const Shape xs = x.shape();
  const Shape ws = w.shape();  // (Cin, Cout, kh, kw)
  if (stride < 1 || stride > 2) throw ContractError("conv_transpose2d: stride must be 1 or 2");
  if (pad < 0) throw ContractError("conv_transpose2d: padding must be >= 0");
  if (ws.n != xs.c)
    throw DimensionError("channel", "conv_transpose2d: input has " + std::to_string(xs.c) +
                                        " channels, weight expects " + std::to_string(ws.n));
  const int cout = ws.c;
  check_bias(b, cout, "conv_transpose2d");
  const int out_h = (xs.h - 1) * stride - 2 * pad + ws.h;
  const int out_w = (xs.w - 1) * stride - 2 * pad + ws.w;
  if (out_h < 1) throw DimensionError("height", "conv_transpose2d: empty output height");
  if (out_w < 1) throw DimensionError("width", "conv_transpose2d: empty output width");

  const int cin = xs.c;
  const int kk = cout * ws.h * ws.w;
  const int in_cols = xs.h * xs.w;
  const std::size_t out_plane = static_cast<std::size_t>(out_h) * out_w;
  const Shape os{xs.n, cout, out_h, out_w};

  std::vector<T> out(os.numel(), T(0));
  std::vector<T> col(static_cast<std::size_t>(kk) * in_cols);
  const T* xd = x.data().data();
  const T* wd = w.data().data();
  for (int n = 0; n < xs.n; ++n) {
    const T* xn = xd + static_cast<std::size_t>(n) * cin * in_cols;
    kernels::gemm_tn(kk, in_cols, cin, wd, kk, xn, in_cols, col.data(), in_cols, false);
    T* on = out.data() + static_cast<std::size_t>(n) * cout * out_plane;
    col2im(col.data(), cout, out_h, out_w, ws.h, ws.w, stride, pad, pad, xs.h, xs.w, on);
    if (b.defined()) {
      const T* bd = b.data().data();
      for (int o = 0; o < cout; ++o) {
        T* row = on + static_cast<std::size_t>(o) * out_plane;
        for (std::size_t p = 0; p < out_plane; ++p) row[p] += bd[o];
      }
    }
  }

  auto xi = x.impl();
  auto wi = w.impl();
  auto bi = b.defined() ? b.impl() : nullptr;
  return detail::make_output<T>(
      os, std::move(out), {x, w, b}, "conv_transpose2d",
      [xi, wi, bi, xs, ws, stride, pad, out_h, out_w](const TensorImpl<T>& o) {
        const int cin = xs.c;
        const int cout = ws.c;
        const int kk = cout * ws.h * ws.w;
        const int in_cols = xs.h * xs.w;
        const std::size_t out_plane = static_cast<std::size_t>(out_h) * out_w;
        std::vector<T> col(static_cast<std::size_t>(kk) * in_cols);
        T* gw = wi->requires_grad ? wi->grad_buffer().data() : nullptr;
        T* gb = bi && bi->requires_grad ? bi->grad_buffer().data() : nullptr;
        T* gx = xi->requires_grad ? xi->grad_buffer().data() : nullptr;
        for (int n = 0; n < xs.n; ++n) {
          const T* gyn = o.grad.data() + static_cast<std::size_t>(n) * cout * out_plane;
          im2col(gyn, cout, out_h, out_w, ws.h, ws.w, stride, pad, pad, xs.h, xs.w, col.data());
          if (gx)
            kernels::gemm_nn(cin, in_cols, kk, wi->data.data(), kk, col.data(), in_cols,
                             gx + static_cast<std::size_t>(n) * cin * in_cols, in_cols, true);
          if (gw)
            kernels::gemm_nt(cin, kk, in_cols,
                             xi->data.data() + static_cast<std::size_t>(n) * cin * in_cols, in_cols,
                             col.data(), in_cols, gw, kk, true);
          if (gb)
            for (int c = 0; c < cout; ++c)
              gb[c] += kernels::sum(out_plane, gyn + static_cast<std::size_t>(c) * out_plane);
        }
      });
}

// ------------------------------------------------------------ activations

template <class T>
Tensor<T> activation(const Tensor<T>& x, Activation kind) {
  const auto xd = x.data();
  std::vector<T> out(xd.size());
  auto xi = x.impl();
  if (kind == Activation::kRelu) {
    kernels::relu_forward(xd.size(), xd.data(), out.data());
    return detail::make_output<T>(x.shape(), std::move(out), {x}, "relu",
                                  [xi](const TensorImpl<T>& o) {
                                    kernels::relu_backward(o.data.size(), xi->data.data(),
                                                           o.grad.data(),
                                                           xi->grad_buffer().data());
                                  });
  }
  // Clamped so the result stays strictly inside (0,1) in finite precision.
  const T lo = std::numeric_limits<T>::min();
  const T hi = std::nextafter(T(1), T(0));
  for (std::size_t i = 0; i < xd.size(); ++i) {
    const T v = xd[i];
    T y;
    if (v >= T(0)) {
      y = T(1) / (T(1) + std::exp(-v));
    } else {
      const T e = std::exp(v);
      y = e / (T(1) + e);
    }
    out[i] = std::clamp(y, lo, hi);
  }
  return detail::make_output<T>(x.shape(), std::move(out), {x}, "sigmoid",
                                [xi](const TensorImpl<T>& o) {
                                  auto gx = xi->grad_buffer();
                                  for (std::size_t i = 0; i < gx.size(); ++i) {
                                    const T y = o.data[i];
                                    gx[i] += o.grad[i] * y * (T(1) - y);
                                  }
                                });
}

// -------------------------------------------------------- global_avg_pool

template <class T>
Tensor<T> global_avg_pool(const Tensor<T>& x) {
  const Shape xs = x.shape();
  const std::size_t plane = xs.plane();
  const T inv = T(1) / static_cast<T>(plane);
  const Shape os{xs.n, xs.c, 1, 1};
  std::vector<T> out(os.numel());
  const T* xd = x.data().data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = kernels::sum(plane, xd + i * plane) * inv;
  auto xi = x.impl();
  return detail::make_output<T>(os, std::move(out), {x}, "global_avg_pool",
                                [xi, plane, inv](const TensorImpl<T>& o) {
                                  T* gx = xi->grad_buffer().data();
                                  for (std::size_t i = 0; i < o.grad.size(); ++i) {
                                    const T g = o.grad[i] * inv;
                                    T* dst = gx + i * plane;
                                    for (std::size_t p = 0; p < plane; ++p) dst[p] += g;
                                  }
                                });
}

// ----------------------------------------------------------------- concat

template <class T>
Tensor<T> concat(const std::vector<Tensor<T>>& xs) {
  if (xs.empty()) throw ContractError("concat: empty input list");
  const Shape first = xs.front().shape();
  int channels = 0;
  for (const auto& t : xs) {
    const Shape s = t.shape();
    if (s.n != first.n)
      throw DimensionError("batch", "concat: batch extent " + std::to_string(s.n) + " != " +
                                        std::to_string(first.n));
    if (s.h != first.h)
      throw DimensionError("height", "concat: height " + std::to_string(s.h) + " != " +
                                         std::to_string(first.h));
    if (s.w != first.w)
      throw DimensionError("width", "concat: width " + std::to_string(s.w) + " != " +
                                        std::to_string(first.w));
    channels += s.c;
  }
  const Shape os{first.n, channels, first.h, first.w};
  const std::size_t plane = first.plane();
  std::vector<T> out(os.numel());
  for (int n = 0; n < first.n; ++n) {
    T* dst = out.data() + static_cast<std::size_t>(n) * channels * plane;
    for (const auto& t : xs) {
      const std::size_t len = static_cast<std::size_t>(t.shape().c) * plane;
      const T* src = t.data().data() + static_cast<std::size_t>(n) * len;
      std::copy(src, src + len, dst);
      dst += len;
    }
  }
  std::vector<std::shared_ptr<TensorImpl<T>>> impls;
  for (const auto& t : xs) impls.push_back(t.impl());
  return detail::make_output<T>(
      os, std::move(out), xs, "concat", [impls, channels, plane](const TensorImpl<T>& o) {
        const int batch = o.shape.n;
        std::size_t offset = 0;
        for (const auto& in : impls) {
          const std::size_t len = static_cast<std::size_t>(in->shape.c) * plane;
          if (in->requires_grad) {
            T* gx = in->grad_buffer().data();
            for (int n = 0; n < batch; ++n) {
              const T* src = o.grad.data() + static_cast<std::size_t>(n) * channels * plane + offset;
              T* dst = gx + static_cast<std::size_t>(n) * len;
              for (std::size_t i = 0; i < len; ++i) dst[i] += src[i];
            }
          }
          offset += len;
        }
      });
}

// ------------------------------------------------------------------ ewise

template <class T>
Tensor<T> ewise(const Tensor<T>& a, const Tensor<T>& b, Ewise kind) {
  const Shape as = a.shape();
  const Shape bs = b.shape();
  const auto ae = extents(as);
  const auto be = extents(bs);
  std::array<int, 4> oe{};
  for (int ax = 0; ax < 4; ++ax) {
    if (ae[ax] == be[ax] || be[ax] == 1) {
      oe[ax] = ae[ax];
    } else if (ae[ax] == 1) {
      oe[ax] = be[ax];
    } else {
      throw DimensionError(axis_name(ax), std::string("ewise: cannot broadcast ") + as.str() +
                                              " with " + bs.str() + " along the " +
                                              axis_name(ax) + " axis");
    }
  }
  const Shape os{oe[0], oe[1], oe[2], oe[3]};
  const std::size_t total = os.numel();
  std::vector<T> out(total);
  const T* ad = a.data().data();
  const T* bd = b.data().data();
  const bool same = as == bs;

  // Strides into each operand; zero along broadcast axes.
  auto strides = [&](const std::array<int, 4>& e) {
    std::array<std::size_t, 4> s{};
    std::size_t acc = 1;
    for (int ax = 3; ax >= 0; --ax) {
      s[ax] = e[ax] == 1 ? 0 : acc;
      acc *= static_cast<std::size_t>(e[ax]);
    }
    return s;
  };
  const auto sa = strides(ae);
  const auto sb = strides(be);
  auto for_each = [oe, sa, sb](auto&& fn) {
    std::size_t o = 0;
    for (int n = 0; n < oe[0]; ++n)
      for (int c = 0; c < oe[1]; ++c)
        for (int h = 0; h < oe[2]; ++h)
          for (int w = 0; w < oe[3]; ++w, ++o)
            fn(o, n * sa[0] + c * sa[1] + h * sa[2] + w * sa[3],
               n * sb[0] + c * sb[1] + h * sb[2] + w * sb[3]);
  };

  if (same && kind == Ewise::kMul) {
    kernels::mul(total, ad, bd, out.data());
  } else if (same && kind == Ewise::kAdd) {
    kernels::add(total, ad, bd, out.data());
  } else {
    for_each([&](std::size_t o, std::size_t ia, std::size_t ib) {
      switch (kind) {
        case Ewise::kMul: out[o] = ad[ia] * bd[ib]; break;
        case Ewise::kAdd: out[o] = ad[ia] + bd[ib]; break;
        case Ewise::kSub: out[o] = ad[ia] - bd[ib]; break;
      }
    });
  }

  auto ai = a.impl();
  auto bi = b.impl();
  static constexpr const char* kNames[] = {"mul", "add", "sub"};
  return detail::make_output<T>(
      os, std::move(out), {a, b}, kNames[static_cast<int>(kind)],
      [ai, bi, kind, for_each](const TensorImpl<T>& o) {
        T* ga = ai->requires_grad ? ai->grad_buffer().data() : nullptr;
        T* gb = bi->requires_grad ? bi->grad_buffer().data() : nullptr;
        const T* gy = o.grad.data();
        const T* ad = ai->data.data();
        const T* bd = bi->data.data();
        for_each([&](std::size_t i, std::size_t ia, std::size_t ib) {
          switch (kind) {
            case Ewise::kMul:
              if (ga) ga[ia] += gy[i] * bd[ib];
              if (gb) gb[ib] += gy[i] * ad[ia];
              break;
            case Ewise::kAdd:
              if (ga) ga[ia] += gy[i];
              if (gb) gb[ib] += gy[i];
              break;
            case Ewise::kSub:
              if (ga) ga[ia] += gy[i];
              if (gb) gb[ib] -= gy[i];
              break;
          }
        });
      });
}

// ---------------------------------------------------------------- scalars

template <class T>
Tensor<T> scale(const Tensor<T>& x, T factor) {
  const auto xd = x.data();
  std::vector<T> out(xd.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = xd[i] * factor;
  auto xi = x.impl();
  return detail::make_output<T>(x.shape(), std::move(out), {x}, "scale",
                                [xi, factor](const TensorImpl<T>& o) {
                                  kernels::axpy(o.grad.size(), factor, o.grad.data(),
                                                xi->grad_buffer().data());
                                });
}

template <class T>
Tensor<T> sum(const Tensor<T>& x) {
  const auto xd = x.data();
  std::vector<T> out{kernels::sum(xd.size(), xd.data())};
  auto xi = x.impl();
  return detail::make_output<T>(Shape{}, std::move(out), {x}, "sum", [xi](const TensorImpl<T>& o) {
    const T g = o.grad[0];
    for (T& v : xi->grad_buffer()) v += g;
  });
}

template <class T>
Tensor<T> mean(const Tensor<T>& x) {
  return scale(sum(x), T(1) / static_cast<T>(x.numel()));
}

template <class T>
Tensor<T> mse_loss(const Tensor<T>& a, const Tensor<T>& b) {
  if (!(a.shape() == b.shape()))
    throw DimensionError("shape", "mse_loss: shapes " + a.shape().str() + " and " +
                                      b.shape().str() + " differ");
  const auto ad = a.data();
  const auto bd = b.data();
  const std::size_t count = ad.size();
  T acc = T(0);
  for (std::size_t i = 0; i < count; ++i) {
    const T d = ad[i] - bd[i];
    acc += d * d;
  }
  std::vector<T> out{acc / static_cast<T>(count)};
  auto ai = a.impl();
  auto bi = b.impl();
  return detail::make_output<T>(Shape{}, std::move(out), {a, b}, "mse_loss",
                                [ai, bi, count](const TensorImpl<T>& o) {
                                  const T g = o.grad[0] * T(2) / static_cast<T>(count);
                                  T* ga = ai->requires_grad ? ai->grad_buffer().data() : nullptr;
                                  T* gb = bi->requires_grad ? bi->grad_buffer().data() : nullptr;
                                  for (std::size_t i = 0; i < count; ++i) {
                                    const T d = (ai->data[i] - bi->data[i]) * g;
                                    if (ga) ga[i] += d;
                                    if (gb) gb[i] -= d;
                                  }
                                });
}

#define CDG_INSTANTIATE(T)                                                                      \
  template Tensor<T> conv2d(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,               \
                            Conv2dGeometry);                                                    \
  template Tensor<T> conv_transpose2d(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, int, \
                                      int);                                                     \
  template Tensor<T> activation(const Tensor<T>&, Activation);                                  \
  template Tensor<T> global_avg_pool(const Tensor<T>&);                                         \
  template Tensor<T> concat(const std::vector<Tensor<T>>&);                                     \
  template Tensor<T> ewise(const Tensor<T>&, const Tensor<T>&, Ewise);                          \
  template Tensor<T> scale(const Tensor<T>&, T);                                                \
  template Tensor<T> sum(const Tensor<T>&);                                                     \
  template Tensor<T> mean(const Tensor<T>&);                                                    \
  template Tensor<T> mse_loss(const Tensor<T>&, const Tensor<T>&);

CDG_INSTANTIATE(float)
CDG_INSTANTIATE(double)
#undef CDG_INSTANTIATE

}  // namespace cdg
