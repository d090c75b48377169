#include "cdgnet/deform_conv.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cdgnet/errors.hpp"
#include "cdgnet/kernels.hpp"

namespace cdg {

namespace {

using detail::TensorImpl;

template <class T>
T pixel(const T* plane, int height, int width, int y, int x) {
  return (y >= 0 && y < height && x >= 0 && x < width)
             ? plane[static_cast<std::size_t>(y) * width + x]
             : T(0);
}

// Bilinear corner weights for one sampling position.
template <class T>
struct Corners {
  int y0, x0;
  T ly, lx;
};

template <class T>
Corners<T> corners(T y, T x) {
  const T fy = std::floor(y);
  const T fx = std::floor(x);
  // Far-out samples read zero anyway; clamping keeps the int cast defined.
  const T lim = T(1 << 30);
  const int y0 = static_cast<int>(std::clamp(fy, -lim, lim));
  const int x0 = static_cast<int>(std::clamp(fx, -lim, lim));
  return {y0, x0, y - fy, x - fx};
}

// Bilinear taps for every (tap, pixel) of one image. Depends only on the
// offsets, so it is built once and reused across channels.
template <class T>
struct SampleTable {
  std::vector<int> index;  // 4 flat indices per site, -1 when outside
  std::vector<T> frac;     // ly, lx per site

  void build(const T* off, int height, int width) {
    const std::size_t plane = static_cast<std::size_t>(height) * width;
    index.resize(kDeformTaps * plane * 4);
    frac.resize(kDeformTaps * plane * 2);
    for (int k = 0; k < kDeformTaps; ++k) {
      const T* dy = off + (2 * k) * plane;
      const T* dx = off + (2 * k + 1) * plane;
      const int ki = k / 3 - 1;
      const int kj = k % 3 - 1;
      for (int py = 0; py < height; ++py)
        for (int px = 0; px < width; ++px) {
          const std::size_t p = static_cast<std::size_t>(py) * width + px;
          const std::size_t site = k * plane + p;
          const auto q = corners(static_cast<T>(py + ki) + dy[p], static_cast<T>(px + kj) + dx[p]);
          int* idx = &index[site * 4];
          for (int c = 0; c < 4; ++c) {
            const int y = q.y0 + c / 2;
            const int x = q.x0 + c % 2;
            idx[c] = (y >= 0 && y < height && x >= 0 && x < width) ? y * width + x : -1;
          }
          frac[site * 2] = q.ly;
          frac[site * 2 + 1] = q.lx;
        }
    }
  }
};

template <class T>
T at(const T* plane, int i) {
  return i >= 0 ? plane[i] : T(0);
}

// Sampling columns for one image: col[(c*9+k), p], p = y*W+x.
template <class T>
void deform_im2col(const T* x, const SampleTable<T>& table, int channels, std::size_t plane,
                   T* col) {
  const std::size_t sites = kDeformTaps * plane;
  for (int c = 0; c < channels; ++c) {
    const T* xc = x + c * plane;
    T* row = col + c * sites;
    const int* idx = table.index.data();
    const T* fr = table.frac.data();
    for (std::size_t s = 0; s < sites; ++s, idx += 4, fr += 2) {
      const T ly = fr[0];
      const T lx = fr[1];
      row[s] = (T(1) - ly) * ((T(1) - lx) * at(xc, idx[0]) + lx * at(xc, idx[1])) +
               ly * ((T(1) - lx) * at(xc, idx[2]) + lx * at(xc, idx[3]));
    }
  }
}

}  // namespace

template <class T>
BilinearSample<T> bilinear_sample(const T* plane, int height, int width, T y, T x) {
  const auto q = corners(y, x);
  const T v00 = pixel(plane, height, width, q.y0, q.x0);
  const T v01 = pixel(plane, height, width, q.y0, q.x0 + 1);
  const T v10 = pixel(plane, height, width, q.y0 + 1, q.x0);
  const T v11 = pixel(plane, height, width, q.y0 + 1, q.x0 + 1);
  BilinearSample<T> s;
  s.value = (T(1) - q.ly) * ((T(1) - q.lx) * v00 + q.lx * v01) +
            q.ly * ((T(1) - q.lx) * v10 + q.lx * v11);
  s.d_y = (T(1) - q.lx) * (v10 - v00) + q.lx * (v11 - v01);
  s.d_x = (T(1) - q.ly) * (v01 - v00) + q.ly * (v11 - v10);
  return s;
}

template <class T>
BilinearSample<T> bilinear_sample(const Tensor<T>& feat, T y, T x, int n, int c) {
  const Shape& s = feat.shape();
  if (n < 0 || n >= s.n) throw DimensionError("batch", "bilinear_sample: batch index out of range");
  if (c < 0 || c >= s.c)
    throw DimensionError("channel", "bilinear_sample: channel index out of range");
  const T* plane = feat.data().data() + (static_cast<std::size_t>(n) * s.c + c) * s.plane();
  return bilinear_sample(plane, s.h, s.w, y, x);
}

template <class T>
Tensor<T> deform_conv2d(const Tensor<T>& x, const Tensor<T>& offsets, const Tensor<T>& w,
                        const Tensor<T>& b) {
  const Shape xs = x.shape();
  const Shape os = offsets.shape();
  const Shape ws = w.shape();
  if (ws.h != 3 || ws.w != 3)
    throw DimensionError("kernel", "deform_conv2d: only 3x3 kernels are supported");
  if (ws.c != xs.c)
    throw DimensionError("channel", "deform_conv2d: input has " + std::to_string(xs.c) +
                                        " channels, weight expects " + std::to_string(ws.c));
  if (os.n != xs.n) throw DimensionError("batch", "deform_conv2d: offset batch mismatch");
  if (os.c != kOffsetChannels)
    throw DimensionError("channel", "deform_conv2d: offsets need " +
                                        std::to_string(kOffsetChannels) + " channels, got " +
                                        std::to_string(os.c));
  if (os.h != xs.h) throw DimensionError("height", "deform_conv2d: offset height mismatch");
  if (os.w != xs.w) throw DimensionError("width", "deform_conv2d: offset width mismatch");
  if (b.defined() && static_cast<int>(b.numel()) != ws.n)
    throw DimensionError("bias", "deform_conv2d: bias size mismatch");

  const int cout = ws.n;
  const int k = xs.c * kDeformTaps;
  const int cols = xs.h * xs.w;
  const std::size_t plane = xs.plane();
  const Shape out_shape{xs.n, cout, xs.h, xs.w};
  std::vector<T> out(out_shape.numel());
  std::vector<T> col(static_cast<std::size_t>(k) * cols);
  SampleTable<T> table;
  for (int n = 0; n < xs.n; ++n) {
    table.build(offsets.data().data() + n * os.c * plane, xs.h, xs.w);
    deform_im2col(x.data().data() + n * xs.c * plane, table, xs.c, plane, col.data());
    T* on = out.data() + static_cast<std::size_t>(n) * cout * cols;
    kernels::gemm_nn(cout, cols, k, w.data().data(), k, col.data(), cols, on, cols, false);
    if (b.defined())
      for (int o = 0; o < cout; ++o) {
        const T bv = b.data()[o];
        for (int p = 0; p < cols; ++p) on[static_cast<std::size_t>(o) * cols + p] += bv;
      }
  }

  auto xi = x.impl();
  auto oi = offsets.impl();
  auto wi = w.impl();
  auto bi = b.defined() ? b.impl() : nullptr;
  return detail::make_output<T>(
      out_shape, std::move(out), {x, offsets, w, b}, "deform_conv2d",
      [xi, oi, wi, bi, xs, cout](const TensorImpl<T>& o) {
        const int k = xs.c * kDeformTaps;
        const int cols = xs.h * xs.w;
        const std::size_t plane = xs.plane();
        T* gx = xi->requires_grad ? xi->grad_buffer().data() : nullptr;
        T* go = oi->requires_grad ? oi->grad_buffer().data() : nullptr;
        T* gw = wi->requires_grad ? wi->grad_buffer().data() : nullptr;
        T* gb = bi && bi->requires_grad ? bi->grad_buffer().data() : nullptr;
        std::vector<T> col(static_cast<std::size_t>(k) * cols);
        std::vector<T> dcol(static_cast<std::size_t>(k) * cols);
        SampleTable<T> table;
        const std::size_t sites = kDeformTaps * plane;
        for (int n = 0; n < xs.n; ++n) {
          const T* gyn = o.grad.data() + static_cast<std::size_t>(n) * cout * cols;
          const T* xn = xi->data.data() + n * xs.c * plane;
          table.build(oi->data.data() + n * kOffsetChannels * plane, xs.h, xs.w);
          if (gw) {
            deform_im2col(xn, table, xs.c, plane, col.data());
            kernels::gemm_nt(cout, k, cols, gyn, cols, col.data(), cols, gw, k, true);
          }
          if (gb)
            for (int c = 0; c < cout; ++c)
              gb[c] += kernels::sum(static_cast<std::size_t>(cols),
                                    gyn + static_cast<std::size_t>(c) * cols);
          if (!gx && !go) continue;
          kernels::gemm_tn(k, cols, cout, wi->data.data(), k, gyn, cols, dcol.data(), cols, false);
          T* gxn = gx ? gx + n * xs.c * plane : nullptr;
          T* gon = go ? go + n * kOffsetChannels * plane : nullptr;
          for (int c = 0; c < xs.c; ++c) {
            const T* xc = xn + c * plane;
            T* gxc = gxn ? gxn + c * plane : nullptr;
            const T* drow = dcol.data() + c * sites;
            const int* idx = table.index.data();
            const T* fr = table.frac.data();
            for (std::size_t s = 0; s < sites; ++s, idx += 4, fr += 2) {
              const T g = drow[s];
              const T ly = fr[0];
              const T lx = fr[1];
              if (gon) {
                const T v00 = at(xc, idx[0]);
                const T v01 = at(xc, idx[1]);
                const T v10 = at(xc, idx[2]);
                const T v11 = at(xc, idx[3]);
                // Offset channels: site s = t*plane + p maps to 2t (dy) and 2t+1 (dx).
                const std::size_t t = s / plane;
                const std::size_t p = s - t * plane;
                gon[(2 * t) * plane + p] += g * ((T(1) - lx) * (v10 - v00) + lx * (v11 - v01));
                gon[(2 * t + 1) * plane + p] += g * ((T(1) - ly) * (v01 - v00) + ly * (v11 - v10));
              }
              if (gxc) {
                if (idx[0] >= 0) gxc[idx[0]] += g * (T(1) - ly) * (T(1) - lx);
                if (idx[1] >= 0) gxc[idx[1]] += g * (T(1) - ly) * lx;
                if (idx[2] >= 0) gxc[idx[2]] += g * ly * (T(1) - lx);
                if (idx[3] >= 0) gxc[idx[3]] += g * ly * lx;
              }
            }
          }
        }
      });
}

#define CDG_INSTANTIATE(T)                                                                   \
  template BilinearSample<T> bilinear_sample(const Tensor<T>&, T, T, int, int);              \
  template BilinearSample<T> bilinear_sample(const T*, int, int, T, T);                      \
  template Tensor<T> deform_conv2d(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,     \
                                   const Tensor<T>&);

CDG_INSTANTIATE(float)
CDG_INSTANTIATE(double)
#undef CDG_INSTANTIATE

}  // namespace cdg
