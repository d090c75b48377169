#include "cdgnet/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cdgnet/errors.hpp"

namespace cdg {

std::mt19937_64 derived_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

Tensor<float> normalize(const Tensor<float>& img01) {
  Tensor<float> out(img01.shape());
  auto s = img01.data();
  auto d = out.mutable_data();
  for (std::size_t i = 0; i < s.size(); ++i) d[i] = s[i] - 0.5f;
  return out;
}

Tensor<float> denormalize(const Tensor<float>& net) {
  Tensor<float> out(net.shape());
  auto s = net.data();
  auto d = out.mutable_data();
  for (std::size_t i = 0; i < s.size(); ++i) d[i] = std::clamp(s[i] + 0.5f, 0.0f, 1.0f);
  return out;
}

Tensor<double> luma(const Tensor<float>& rgb) {
  const Shape s = rgb.shape();
  if (s.c != 3) throw DimensionError("channel", "luma expects 3 channels, got " + s.str());
  Tensor<double> out(Shape{s.n, 1, s.h, s.w});
  auto d = out.mutable_data();
  auto x = rgb.data();
  const std::size_t plane = s.plane();
  for (int n = 0; n < s.n; ++n) {
    const float* p = x.data() + n * 3 * plane;
    for (std::size_t i = 0; i < plane; ++i)
      d[n * plane + i] = 0.299 * p[i] + 0.587 * p[plane + i] + 0.114 * p[2 * plane + i];
  }
  return out;
}

Tensor<float> crop(const Tensor<float>& img, int top, int left, int height, int width) {
  const Shape s = img.shape();
  if (top < 0 || left < 0 || top + height > s.h || left + width > s.w)
    throw InputError("crop window exceeds image extents " + s.str());
  Tensor<float> out(Shape{s.n, s.c, height, width});
  auto d = out.mutable_data();
  std::size_t o = 0;
  for (int p = 0; p < s.n * s.c; ++p)
    for (int y = 0; y < height; ++y) {
      const float* row = img.data().data() + (static_cast<std::size_t>(p) * s.h + top + y) * s.w + left;
      std::copy(row, row + width, d.begin() + o);
      o += width;
    }
  return out;
}

std::pair<int, int> crop_offsets(int height, int width, int size, std::mt19937_64& rng) {
  if (size < 1 || size > height || size > width)
    throw InputError("crop size " + std::to_string(size) + " exceeds image extents " +
                     std::to_string(height) + "x" + std::to_string(width));
  const int top = std::uniform_int_distribution<int>(0, height - size)(rng);
  const int left = std::uniform_int_distribution<int>(0, width - size)(rng);
  return {top, left};
}

ImagePair random_crop(const ImagePair& pair, int size, std::mt19937_64& rng) {
  const Shape s = pair.sharp.shape();
  const auto [top, left] = crop_offsets(s.h, s.w, size, rng);
  ImagePair out;
  out.id = pair.id;
  out.blurry = crop(pair.blurry, top, left, size, size);
  out.sharp = crop(pair.sharp, top, left, size, size);
  if (pair.mask.defined()) out.mask = crop(pair.mask, top, left, size, size);
  return out;
}

Tensor<float> reflect_pad(const Tensor<float>& img, int pad_bottom, int pad_right) {
  const Shape s = img.shape();
  if (pad_bottom < 0 || pad_right < 0 || pad_bottom >= s.h || pad_right >= s.w)
    throw InputError("reflect padding must be smaller than the image extent");
  const int h = s.h + pad_bottom, w = s.w + pad_right;
  Tensor<float> out(Shape{s.n, s.c, h, w});
  auto mirror = [](int i, int n) { return i < n ? i : 2 * (n - 1) - i; };
  for (int n = 0; n < s.n; ++n)
    for (int c = 0; c < s.c; ++c)
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) out.at(n, c, y, x) = img(n, c, mirror(y, s.h), mirror(x, s.w));
  return out;
}

Kernel2d line_kernel(int length, double angle) {
  if (length < 1) throw InputError("line kernel length must be >= 1");
  const double c = std::cos(angle), sn = std::sin(angle);
  const double half = (length - 1) / 2.0;
  const int radius = static_cast<int>(std::ceil(half)) + 1;
  Kernel2d k;
  k.size = 2 * radius + 1;
  k.taps.assign(static_cast<std::size_t>(k.size) * k.size, 0.0);
  for (int i = 0; i < length; ++i) {
    const double t = i - half;
    // Snap tiny trig residue so axis-aligned kernels stay exact boxes.
    double x = t * c + radius, y = t * sn + radius;
    x = std::abs(x - std::round(x)) < 1e-9 ? std::round(x) : x;
    y = std::abs(y - std::round(y)) < 1e-9 ? std::round(y) : y;
    const int x0 = static_cast<int>(std::floor(x)), y0 = static_cast<int>(std::floor(y));
    const double fx = x - x0, fy = y - y0;
    const double w[4] = {(1 - fy) * (1 - fx), (1 - fy) * fx, fy * (1 - fx), fy * fx};
    const int yy[4] = {y0, y0, y0 + 1, y0 + 1}, xx[4] = {x0, x0 + 1, x0, x0 + 1};
    for (int j = 0; j < 4; ++j)
      if (w[j] != 0) k.taps[static_cast<std::size_t>(yy[j]) * k.size + xx[j]] += w[j] / length;
  }
  return k;
}

Tensor<float> filter2d(const Tensor<float>& img, const Kernel2d& k) {
  const Shape s = img.shape();
  const int r = k.size / 2;
  Tensor<float> out(s);
  auto d = out.mutable_data();
  auto x = img.data();
  std::vector<std::pair<int, double>> nz;  // (flat offset in kernel, weight)
  for (int i = 0; i < k.size * k.size; ++i)
    if (k.taps[i] != 0) nz.emplace_back(i, k.taps[i]);
  for (int p = 0; p < s.n * s.c; ++p) {
    const float* src = x.data() + static_cast<std::size_t>(p) * s.plane();
    float* dst = d.data() + static_cast<std::size_t>(p) * s.plane();
    for (int y = 0; y < s.h; ++y)
      for (int xo = 0; xo < s.w; ++xo) {
        double acc = 0;
        for (auto [i, wgt] : nz) {
          const int yy = std::clamp(y + i / k.size - r, 0, s.h - 1);
          const int xx = std::clamp(xo + i % k.size - r, 0, s.w - 1);
          acc += wgt * src[yy * s.w + xx];
        }
        dst[y * s.w + xo] = static_cast<float>(acc);
      }
  }
  return out;
}

BlurField random_blur_field(int height, int width, std::mt19937_64& rng,
                            const BlurFieldOptions& opts) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  BlurField f;
  f.large_length = std::uniform_int_distribution<int>(opts.large_min, opts.large_max)(rng);
  f.large_angle = unit(rng) * std::numbers::pi;
  f.small_length = std::uniform_int_distribution<int>(opts.small_min, opts.small_max)(rng);
  f.small_angle = unit(rng) * std::numbers::pi;
  f.noise_sigma = opts.noise_sigma;
  // Half-plane through a point in the central half of the image.
  const double theta = unit(rng) * 2 * std::numbers::pi;
  const double py = height * (0.25 + 0.5 * unit(rng));
  const double px = width * (0.25 + 0.5 * unit(rng));
  f.alpha = Tensor<float>(Shape{1, 1, height, width});
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const double dist = (x - px) * std::cos(theta) + (y - py) * std::sin(theta);
      f.alpha.at(0, 0, y, x) = static_cast<float>(1.0 / (1.0 + std::exp(-dist / opts.softness)));
    }
  return f;
}

Tensor<float> synth_blur(const Tensor<float>& sharp, const BlurField& field, std::mt19937_64& rng) {
  const Shape s = sharp.shape();
  if (!field.alpha.defined() || field.alpha.shape().h != s.h || field.alpha.shape().w != s.w)
    throw DimensionError("shape", "blend map extents must match the image " + s.str());
  auto large = filter2d(sharp, line_kernel(field.large_length, field.large_angle));
  auto small = filter2d(sharp, line_kernel(field.small_length, field.small_angle));
  Tensor<float> out(s);
  auto d = out.mutable_data();
  auto a = field.alpha.data();
  std::normal_distribution<double> noise(0.0, field.noise_sigma > 0 ? field.noise_sigma : 1.0);
  const std::size_t plane = s.plane();
  for (std::size_t i = 0; i < s.numel(); ++i) {
    const double w = a[i % plane];
    double v = w * large.data()[i] + (1 - w) * small.data()[i];
    if (field.noise_sigma > 0) v += noise(rng);
    d[i] = static_cast<float>(std::clamp(v, 0.0, 1.0));
  }
  return out;
}

Tensor<float> generate_scene(int height, int width, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Tensor<float> img(Shape{1, 3, height, width});
  double base[3], slope[3];
  for (int c = 0; c < 3; ++c) {
    base[c] = 0.2 + 0.6 * unit(rng);
    slope[c] = 0.4 * (unit(rng) - 0.5);
  }
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x)
        img.at(0, c, y, x) = static_cast<float>(base[c] + slope[c] * (x + y) / (height + width));
  const int shapes = 6 + static_cast<int>(unit(rng) * 6);
  for (int k = 0; k < shapes; ++k) {
    float colour[3];
    for (float& v : colour) v = static_cast<float>(unit(rng));
    const double cy = unit(rng) * height, cx = unit(rng) * width;
    const double ry = (0.08 + 0.25 * unit(rng)) * height, rx = (0.08 + 0.25 * unit(rng)) * width;
    const int kind = static_cast<int>(unit(rng) * 3);
    const double period = 2.0 + unit(rng) * 4.0;
    const double phi = unit(rng) * std::numbers::pi;
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) {
        const double dy = (y - cy) / ry, dx = (x - cx) / rx;
        bool inside = false;
        if (kind == 0) inside = std::abs(dy) <= 1 && std::abs(dx) <= 1;
        if (kind == 1) inside = dy * dy + dx * dx <= 1;
        if (kind == 2 && std::abs(dy) <= 1 && std::abs(dx) <= 1) {
          const double u = x * std::cos(phi) + y * std::sin(phi);
          inside = std::fmod(std::abs(u), period) < period / 2;
        }
        if (inside)
          for (int c = 0; c < 3; ++c) img.at(0, c, y, x) = colour[c];
      }
  }
  return img;
}

}  // namespace cdg
