#pragma once

// Training signal for the two branches: a sharpness estimate, its binary
// mask, the complementary masked targets, and the weighted total loss.

#include <filesystem>
#include <vector>

#include "cdgnet/tensor.hpp"

namespace cdg {

inline constexpr double kDefaultMu = 0.96;

/// Gaussian-smoothed (sigma 2) gradient magnitude of luma, (N, 1, H, W).
/// Not yet normalised.
Tensor<double> sharpness_energy(const Tensor<float>& rgb01);

/// Per-image normaliser: the 99.5th percentile of the energy, floored at 1e-8.
std::vector<double> sharpness_scales(const Tensor<double>& energy);

/// energy / scale[n], clipped to [0, 1].
Tensor<float> normalize_sharpness(const Tensor<double>& energy, const std::vector<double>& scales);

/// Sharpness proxy in [0, 1] for images in [0, 1].
Tensor<float> sharpness_map(const Tensor<float>& rgb01);

/// 1 where S > mu, else 0 (including S == mu). Compared at 32-bit precision.
Tensor<float> sharpness_mask(const Tensor<float>& sharpness, double mu);

/// Reads a mask image: 8-bit single channel with only 0 and 255 present.
Tensor<float> load_mask(const std::filesystem::path& path);

template <class T>
struct BranchTargets {
  Tensor<T> small;  // M * I_gt
  Tensor<T> large;  // (1 - M) * I_gt
};

/// Splits a (N, C, H, W) target with a (N, 1, H, W) binary mask. The two
/// parts sum back to the target exactly.
template <class T>
BranchTargets<T> branch_targets(const Tensor<T>& target, const Tensor<T>& mask);

struct LossWeights {
  double lambda1 = 0.1;  // small-branch term
  double lambda2 = 0.1;  // large-branch term
  void validate() const;
};

template <class T>
struct LossBreakdown {
  Tensor<T> total;
  Tensor<T> rec;
  Tensor<T> small;
  Tensor<T> large;
};

/// mse(restored, gt) + lambda1 * mse(small_img, M gt) + lambda2 * mse(large_img, (1 - M) gt).
template <class T>
LossBreakdown<T> total_loss(const Tensor<T>& restored, const Tensor<T>& large_img,
                            const Tensor<T>& small_img, const Tensor<T>& target,
                            const Tensor<T>& mask, const LossWeights& weights = {});

/// Scalar form of the same weighting.
inline double combine_losses(double rec, double small, double large, const LossWeights& w) {
  return rec + w.lambda1 * small + w.lambda2 * large;
}

}  // namespace cdg
