#pragma once

// Blur diagnostics (gradient statistics, Fourier energy) and the two image
// quality metrics. Inputs are images in [0, 1].

#include <cstdint>
#include <vector>

#include "cdgnet/tensor.hpp"

namespace cdg {

inline constexpr int kHistogramBins = 64;

/// Histogram of central-difference gradient magnitudes of luma over interior
/// pixels, 64 equal bins on [0, 1]; larger magnitudes land in the last bin.
std::vector<std::uint64_t> gradient_histogram(const Tensor<float>& rgb);

/// Sum of histogram counts in bins >= `from`.
std::uint64_t tail_mass(const std::vector<std::uint64_t>& hist, int from = kHistogramBins / 2);

struct Spectrum {
  int height = 0;
  int width = 0;
  std::vector<double> power;           // |F|^2, row-major, DC at index 0
  std::vector<double> radial_log_mag;  // mean log(1 + |F|) per integer radius
  double hf_ratio = 0;                 // energy beyond half-Nyquist / non-DC energy
};

/// 2-D DFT of the luma channel of a single image. Any extents are accepted.
Spectrum fourier_spectrum(const Tensor<float>& rgb);

/// Peak signal-to-noise ratio in dB for unit peak; +infinity when identical.
double psnr(const Tensor<float>& a, const Tensor<float>& b);

/// Gaussian-window (11x11, sigma 1.5) structural similarity averaged over
/// valid window positions and channels. Needs extents of at least 11.
double ssim(const Tensor<float>& a, const Tensor<float>& b);

}  // namespace cdg
