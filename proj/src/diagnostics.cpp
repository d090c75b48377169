#include "cdgnet/diagnostics.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include "cdgnet/errors.hpp"
#include "cdgnet/imaging.hpp"

namespace cdg {

namespace {

void require_same(const Tensor<float>& a, const Tensor<float>& b, const char* what) {
  if (!(a.shape() == b.shape()))
    throw DimensionError("shape", std::string(what) + ": shapes " + a.shape().str() + " and " +
                                      b.shape().str() + " differ");
}

}  // namespace

std::vector<std::uint64_t> gradient_histogram(const Tensor<float>& rgb) {
  const auto y = luma(rgb);
  const Shape s = y.shape();
  std::vector<std::uint64_t> hist(kHistogramBins, 0);
  for (int n = 0; n < s.n; ++n)
    for (int r = 1; r + 1 < s.h; ++r)
      for (int c = 1; c + 1 < s.w; ++c) {
        const double gx = (y(n, 0, r, c + 1) - y(n, 0, r, c - 1)) / 2;
        const double gy = (y(n, 0, r + 1, c) - y(n, 0, r - 1, c)) / 2;
        const double m = std::sqrt(gx * gx + gy * gy);
        const int bin = std::min(kHistogramBins - 1, static_cast<int>(m * kHistogramBins));
        ++hist[bin];
      }
  return hist;
}

std::uint64_t tail_mass(const std::vector<std::uint64_t>& hist, int from) {
  std::uint64_t n = 0;
  for (std::size_t i = static_cast<std::size_t>(from); i < hist.size(); ++i) n += hist[i];
  return n;
}

Spectrum fourier_spectrum(const Tensor<float>& rgb) {
  if (rgb.shape().n != 1) throw DimensionError("batch", "fourier_spectrum expects one image");
  const auto y = luma(rgb);
  const int h = y.shape().h, w = y.shape().w;
  const std::size_t n = static_cast<std::size_t>(h) * w;
  auto* buf = fftw_alloc_complex(n);
  for (std::size_t i = 0; i < n; ++i) {
    buf[i][0] = y.data()[i];
    buf[i][1] = 0;
  }
  fftw_plan plan = fftw_plan_dft_2d(h, w, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);

  Spectrum s;
  s.height = h;
  s.width = w;
  s.power.resize(n);
  const int extent = std::min(h, w);
  const int bins = static_cast<int>(std::ceil(std::sqrt(0.5) * extent)) + 1;
  std::vector<double> log_sum(bins, 0.0);
  std::vector<std::size_t> count(bins, 0);
  double total = 0, high = 0;
  for (int ky = 0; ky < h; ++ky)
    for (int kx = 0; kx < w; ++kx) {
      const std::size_t i = static_cast<std::size_t>(ky) * w + kx;
      const double p = buf[i][0] * buf[i][0] + buf[i][1] * buf[i][1];
      s.power[i] = p;
      // Signed frequencies in cycles per pixel.
      const double fy = static_cast<double>(ky <= h / 2 ? ky : ky - h) / h;
      const double fx = static_cast<double>(kx <= w / 2 ? kx : kx - w) / w;
      const double rho = std::sqrt(fy * fy + fx * fx);
      const int r = std::min(bins - 1, static_cast<int>(rho * extent));
      log_sum[r] += std::log1p(std::sqrt(p));
      ++count[r];
      if (i == 0) continue;
      total += p;
      if (rho > 0.25) high += p;
    }
  fftw_free(buf);
  s.radial_log_mag.resize(bins);
  for (int r = 0; r < bins; ++r) s.radial_log_mag[r] = count[r] ? log_sum[r] / count[r] : 0.0;
  // Relative floor: a constant image leaves only round-off outside DC.
  s.hf_ratio = total > 1e-20 * (s.power[0] + 1) ? high / total : 0.0;
  return s;
}

double psnr(const Tensor<float>& a, const Tensor<float>& b) {
  require_same(a, b, "psnr");
  double se = 0;
  for (std::size_t i = 0; i < a.numel(); ++i) {
    const double d = static_cast<double>(a.data()[i]) - b.data()[i];
    se += d * d;
  }
  const double mse = se / static_cast<double>(a.numel());
  if (mse == 0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

double ssim(const Tensor<float>& a, const Tensor<float>& b) {
  require_same(a, b, "ssim");
  const Shape s = a.shape();
  constexpr int kWin = 11;
  constexpr double kSigma = 1.5;
  if (s.h < kWin || s.w < kWin)
    throw InputError("ssim needs extents of at least 11, got " + s.str());
  double g[kWin];
  double gsum = 0;
  for (int i = 0; i < kWin; ++i) {
    const double d = i - kWin / 2;
    g[i] = std::exp(-d * d / (2 * kSigma * kSigma));
    gsum += g[i];
  }
  for (double& v : g) v /= gsum;
  const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
  const int oh = s.h - kWin + 1, ow = s.w - kWin + 1;
  double acc = 0;
  for (int n = 0; n < s.n; ++n)
    for (int c = 0; c < s.c; ++c) {
      double plane = 0;
      for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x) {
          double mx = 0, my = 0, xx = 0, yy = 0, xy = 0;
          for (int i = 0; i < kWin; ++i)
            for (int j = 0; j < kWin; ++j) {
              const double w = g[i] * g[j];
              const double p = a(n, c, y + i, x + j), q = b(n, c, y + i, x + j);
              mx += w * p;
              my += w * q;
              xx += w * (p * p);
              yy += w * (q * q);
              xy += w * (p * q);
            }
          const double vx = xx - mx * mx, vy = yy - my * my, cov = xy - mx * my;
          plane += ((2 * mx * my + c1) * (2 * cov + c2)) /
                   ((mx * mx + my * my + c1) * (vx + vy + c2));
        }
      acc += plane / (static_cast<double>(oh) * ow);
    }
  return acc / (s.n * s.c);
}

}  // namespace cdg
