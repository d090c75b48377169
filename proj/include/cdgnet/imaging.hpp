#pragma once

// Image-domain utilities: range mapping, crops, padding, and the synthetic
// spatially varying motion blur used to build training pairs.

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "cdgnet/tensor.hpp"

namespace cdg {

/// A training or evaluation example. Images are (1, 3, H, W) in [0, 1]; the
/// mask is (1, 1, H, W) with values in {0, 1} and may be undefined.
struct ImagePair {
  Tensor<float> blurry;
  Tensor<float> sharp;
  Tensor<float> mask;
  std::string id;
};

/// Independent generator for sub-stream `stream` of a run seeded with `seed`.
std::mt19937_64 derived_rng(std::uint64_t seed, std::uint64_t stream);

/// [0, 1] -> [-0.5, 0.5].
Tensor<float> normalize(const Tensor<float>& img01);
/// [-0.5, 0.5] -> [0, 1], clamped.
Tensor<float> denormalize(const Tensor<float>& net);

/// 0.299 R + 0.587 G + 0.114 B, (N, 1, H, W).
Tensor<double> luma(const Tensor<float>& rgb);

/// Window of `size` x `size` starting at (top, left), one image.
Tensor<float> crop(const Tensor<float>& img, int top, int left, int height, int width);

/// Top-left corner drawn uniformly over all windows that fit.
std::pair<int, int> crop_offsets(int height, int width, int size, std::mt19937_64& rng);

/// Same uniformly drawn window applied to every defined field of the pair.
/// Throws InputError when `size` exceeds either extent.
ImagePair random_crop(const ImagePair& pair, int size, std::mt19937_64& rng);

/// Mirror padding (edge pixel not repeated) on the bottom and right.
Tensor<float> reflect_pad(const Tensor<float>& img, int pad_bottom, int pad_right);

/// Dense 2-D kernel, odd square extent, row-major.
struct Kernel2d {
  int size = 1;
  std::vector<double> taps;
  double at(int y, int x) const { return taps[static_cast<std::size_t>(y) * size + x]; }
};

/// Linear motion kernel of `length` samples at `angle` radians (0 = horizontal),
/// splatted bilinearly and normalised to unit sum. Length 1 is a delta.
Kernel2d line_kernel(int length, double angle);

/// Per-channel correlation with clamp-to-edge borders ("same" extent).
Tensor<float> filter2d(const Tensor<float>& img, const Kernel2d& k);

struct BlurField {
  int large_length = 9;
  double large_angle = 0;
  int small_length = 1;
  double small_angle = 0;
  Tensor<float> alpha;  // (1, 1, H, W) in [0, 1]; weight of the large blur
  double noise_sigma = 0.005;
};

struct BlurFieldOptions {
  int large_min = 9, large_max = 15;
  int small_min = 1, small_max = 3;
  double noise_sigma = 0.005;
  double softness = 4.0;  // pixels; width of the transition between regions
};

/// Random lengths and angles and a smoothed half-plane blend map.
BlurField random_blur_field(int height, int width, std::mt19937_64& rng,
                            const BlurFieldOptions& opts = {});

/// alpha * (I * K_large) + (1 - alpha) * (I * K_small) + noise, clipped to [0, 1].
Tensor<float> synth_blur(const Tensor<float>& sharp, const BlurField& field, std::mt19937_64& rng);

/// Piecewise-constant test scene: a shaded background with random rectangles,
/// discs and stripe patches, (1, 3, H, W) in [0, 1].
Tensor<float> generate_scene(int height, int width, std::mt19937_64& rng);

}  // namespace cdg
