#pragma once

// Shared test helpers: seeded random tensors and brute-force oracles that
// share no code with the library kernels.

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <span>
#include <cstdint>
#include <random>
#include <vector>

#include "cdgnet/gradcheck.hpp"
#include "cdgnet/params.hpp"
#include "cdgnet/tensor.hpp"

namespace cdg::test {

/// A fresh directory under the system temp dir, removed on destruction.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& name) : path(std::filesystem::temp_directory_path() / name) {
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

template <class T = double>
Tensor<T> random_tensor(Shape s, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<T> v(s.numel());
  for (auto& x : v) x = static_cast<T>(d(rng));
  return Tensor<T>(s, std::move(v));
}

/// Direct six-deep loop cross-correlation with zero padding.
template <class T>
std::vector<T> naive_conv(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, int stride,
                          int ph, int pw, int& out_h, int& out_w) {
  const Shape xs = x.shape();
  const Shape ws = w.shape();
  out_h = (xs.h + 2 * ph - ws.h) / stride + 1;
  out_w = (xs.w + 2 * pw - ws.w) / stride + 1;
  std::vector<T> out(static_cast<std::size_t>(xs.n) * ws.n * out_h * out_w);
  std::size_t o = 0;
  for (int n = 0; n < xs.n; ++n)
    for (int co = 0; co < ws.n; ++co)
      for (int oy = 0; oy < out_h; ++oy)
        for (int ox = 0; ox < out_w; ++ox) {
          T acc = b.defined() ? b.data()[co] : T(0);
          for (int ci = 0; ci < xs.c; ++ci)
            for (int ky = 0; ky < ws.h; ++ky)
              for (int kx = 0; kx < ws.w; ++kx) {
                const int iy = oy * stride - ph + ky;
                const int ix = ox * stride - pw + kx;
                if (iy < 0 || iy >= xs.h || ix < 0 || ix >= xs.w) continue;
                acc += x(n, ci, iy, ix) * w(co, ci, ky, kx);
              }
          out[o++] = acc;
        }
  return out;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double max_abs_diff(std::span<const float> a, std::span<const float> b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i])));
  return m;
}

template <class T>
bool bitwise_equal(const Tensor<T>& a, const Tensor<T>& b) {
  if (!(a.shape() == b.shape())) return false;
  auto x = a.data();
  auto y = b.data();
  return std::equal(x.begin(), x.end(), y.begin(), [](T p, T q) {
    return std::memcmp(&p, &q, sizeof(T)) == 0;
  });
}

template <class T>
void fill_uniform(Tensor<T> t, std::uint64_t seed, double lo, double hi) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(lo, hi);
  for (auto& v : t.mutable_data()) v = static_cast<T>(d(rng));
}

inline std::vector<GradCheckInput> inputs_from(const ParameterSet<double>& set) {
  std::vector<GradCheckInput> in;
  for (const auto& p : set.items()) in.push_back({p.name, p.value});
  return in;
}

/// Gradient agreement of a 32-bit model against 64-bit central differences.
/// `make(pb)` builds the block from a builder; `loss(block, x)` returns a
/// scalar. Both precisions are built from the same seed.
template <class Make, class Loss>
double float_grad_error(Make make, Loss loss, Shape in, std::uint64_t seed,
                        std::size_t max_probes = 24) {
  ParameterSet<float> fs;
  ParamBuilder<float> fb(fs, seed);
  auto fblock = make(fb);
  ParameterSet<double> ds;
  ParamBuilder<double> db(ds, seed);
  auto dblock = make(db);
  ds.assign_from(fs);  // identical values in both precisions
  auto xd = random_tensor<double>(in, seed + 1);
  auto xf = xd.template cast<float>();
  backward(loss(fblock, xf));
  const double eps = 1e-6;
  double worst = 0;
  for (std::size_t k = 0; k < fs.size(); ++k) {
    auto& fp = fs.items()[k];
    auto dp = ds.items()[k].value;
    auto data = dp.mutable_data();
    const std::size_t count = data.size();
    const std::size_t stride = count <= max_probes ? 1 : count / max_probes;
    for (std::size_t i = 0; i < count; i += stride) {
      if (!fp.mask.empty() && !fp.mask[i]) continue;
      const double saved = data[i];
      NoGradGuard guard;
      data[i] = saved + eps;
      const double up = loss(dblock, xd).item();
      data[i] = saved - eps;
      const double down = loss(dblock, xd).item();
      data[i] = saved;
      const double fd = (up - down) / (2 * eps);
      const double g = fp.value.grad()[i];
      worst = std::max(worst, std::abs(g - fd) / std::max(1.0, std::abs(fd)));
    }
  }
  return worst;
}

}  // namespace cdg::test
