#include "cdgnet/supervision.hpp"

#include <algorithm>
#include <cmath>

#include "cdgnet/errors.hpp"
#include "cdgnet/image_io.hpp"
#include "cdgnet/imaging.hpp"
#include "cdgnet/ops.hpp"

namespace cdg {

namespace {

constexpr double kSmoothSigma = 2.0;
constexpr double kPercentile = 0.995;
constexpr double kScaleFloor = 1e-8;

// Separable Gaussian blur of each plane with clamp-to-edge borders.
void gaussian_blur(std::vector<double>& plane, int h, int w, double sigma) {
  const int r = static_cast<int>(std::ceil(3 * sigma));
  std::vector<double> g(2 * r + 1);
  double sum = 0;
  for (int i = -r; i <= r; ++i) sum += g[i + r] = std::exp(-i * i / (2 * sigma * sigma));
  for (double& v : g) v /= sum;
  std::vector<double> tmp(plane.size());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0;
      for (int i = -r; i <= r; ++i) acc += g[i + r] * plane[y * w + std::clamp(x + i, 0, w - 1)];
      tmp[y * w + x] = acc;
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0;
      for (int i = -r; i <= r; ++i) acc += g[i + r] * tmp[std::clamp(y + i, 0, h - 1) * w + x];
      plane[y * w + x] = acc;
    }
}

}  // namespace

Tensor<double> sharpness_energy(const Tensor<float>& rgb01) {
  const auto y = luma(rgb01);
  const Shape s = y.shape();
  Tensor<double> out(s);
  auto d = out.mutable_data();
  std::vector<double> plane(s.plane());
  for (int n = 0; n < s.n; ++n) {
    for (int r = 0; r < s.h; ++r)
      for (int c = 0; c < s.w; ++c) {
        const int r0 = std::max(r - 1, 0), r1 = std::min(r + 1, s.h - 1);
        const int c0 = std::max(c - 1, 0), c1 = std::min(c + 1, s.w - 1);
        const double gx = c1 > c0 ? (y(n, 0, r, c1) - y(n, 0, r, c0)) / (c1 - c0) : 0.0;
        const double gy = r1 > r0 ? (y(n, 0, r1, c) - y(n, 0, r0, c)) / (r1 - r0) : 0.0;
        plane[static_cast<std::size_t>(r) * s.w + c] = std::sqrt(gx * gx + gy * gy);
      }
    gaussian_blur(plane, s.h, s.w, kSmoothSigma);
    std::copy(plane.begin(), plane.end(), d.begin() + n * s.plane());
  }
  return out;
}

std::vector<double> sharpness_scales(const Tensor<double>& energy) {
  const Shape s = energy.shape();
  std::vector<double> scales;
  for (int n = 0; n < s.n; ++n) {
    std::vector<double> v(energy.data().begin() + n * s.plane(),
                          energy.data().begin() + (n + 1) * s.plane());
    // Linear interpolation between the bracketing order statistics.
    const double pos = kPercentile * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    std::nth_element(v.begin(), v.begin() + lo, v.end());
    const double a = v[lo];
    const double b = lo + 1 < v.size() ? *std::min_element(v.begin() + lo + 1, v.end()) : a;
    scales.push_back(std::max(kScaleFloor, a + (pos - lo) * (b - a)));
  }
  return scales;
}

Tensor<float> normalize_sharpness(const Tensor<double>& energy, const std::vector<double>& scales) {
  const Shape s = energy.shape();
  if (scales.size() != static_cast<std::size_t>(s.n))
    throw DimensionError("batch", "one sharpness scale per image is required");
  Tensor<float> out(s);
  auto d = out.mutable_data();
  for (std::size_t i = 0; i < s.numel(); ++i)
    d[i] = static_cast<float>(std::clamp(energy.data()[i] / scales[i / s.plane()], 0.0, 1.0));
  return out;
}

Tensor<float> sharpness_map(const Tensor<float>& rgb01) {
  const auto e = sharpness_energy(rgb01);
  return normalize_sharpness(e, sharpness_scales(e));
}

Tensor<float> sharpness_mask(const Tensor<float>& sharpness, double mu) {
  const float m = static_cast<float>(mu);
  Tensor<float> out(sharpness.shape());
  auto d = out.mutable_data();
  auto s = sharpness.data();
  for (std::size_t i = 0; i < s.size(); ++i) d[i] = s[i] > m ? 1.0f : 0.0f;
  return out;
}

Tensor<float> load_mask(const std::filesystem::path& path) {
  auto m = load_gray_image(path);
  for (float v : m.data())
    if (v != 0.0f && v != 1.0f)
      throw InputError("mask '" + path.string() + "' contains a value other than 0 and 255 (" +
                       std::to_string(static_cast<int>(std::lround(v * 255))) + ")");
  return m;
}

template <class T>
BranchTargets<T> branch_targets(const Tensor<T>& target, const Tensor<T>& mask) {
  const Shape t = target.shape();
  const Shape m = mask.shape();
  if (m.c != 1 || m.n != t.n || m.h != t.h || m.w != t.w)
    throw DimensionError("shape", "mask " + m.str() + " does not match target " + t.str());
  BranchTargets<T> out{Tensor<T>(t), Tensor<T>(t)};
  auto s = out.small.mutable_data();
  auto l = out.large.mutable_data();
  auto x = target.data();
  auto k = mask.data();
  const std::size_t plane = t.plane();
  for (std::size_t i = 0; i < t.numel(); ++i) {
    const T w = k[(i / (plane * t.c)) * plane + i % plane];
    s[i] = w * x[i];
    l[i] = (T(1) - w) * x[i];
  }
  return out;
}

void LossWeights::validate() const {
  if (!(lambda1 >= 0) || !(lambda2 >= 0))
    throw ConfigError("loss weights must be non-negative");
}

template <class T>
LossBreakdown<T> total_loss(const Tensor<T>& restored, const Tensor<T>& large_img,
                            const Tensor<T>& small_img, const Tensor<T>& target,
                            const Tensor<T>& mask, const LossWeights& weights) {
  weights.validate();
  const auto targets = branch_targets(target, mask);
  LossBreakdown<T> r;
  r.rec = mse_loss(restored, target);
  r.small = mse_loss(small_img, targets.small);
  r.large = mse_loss(large_img, targets.large);
  r.total = add(add(r.rec, scale(r.small, static_cast<T>(weights.lambda1))),
                scale(r.large, static_cast<T>(weights.lambda2)));
  return r;
}

template BranchTargets<float> branch_targets(const Tensor<float>&, const Tensor<float>&);
template BranchTargets<double> branch_targets(const Tensor<double>&, const Tensor<double>&);
template LossBreakdown<float> total_loss(const Tensor<float>&, const Tensor<float>&,
                                         const Tensor<float>&, const Tensor<float>&,
                                         const Tensor<float>&, const LossWeights&);
template LossBreakdown<double> total_loss(const Tensor<double>&, const Tensor<double>&,
                                          const Tensor<double>&, const Tensor<double>&,
                                          const Tensor<double>&, const LossWeights&);

}  // namespace cdg
