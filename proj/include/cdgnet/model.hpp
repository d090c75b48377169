#pragma once

// The two-branch deblurring network: RDB encoder, one attention unit per
// branch, a large-blur and a small-blur deformable decoder, and orientation
// based fusion of the two decoders' features.

#include <cstdint>
#include <string>
#include <vector>

#include "cdgnet/blocks.hpp"

namespace cdg {

struct ModelConfig {
  int channels = 128;       // C: encoder output width
  int small_channels = 32;  // C'': decoder output width
  int reduction_ratio = 8;  // channel attention squeeze factor
  int rdbs_per_stage = 2;
  int large_deforms_per_level = 3;
  int small_resblocks_per_level = 2;

  /// Throws ConfigError on widths the blocks cannot realise.
  void validate() const;
};

template <class T>
struct Encoder {
  struct Stage {
    Conv<T> conv;
    std::vector<Rdb<T>> rdbs;
  };
  std::vector<Stage> stages;

  static Encoder make(ParamBuilder<T>& pb, const ModelConfig& cfg);
  /// Throws InputError unless H and W are divisible by 4.
  Tensor<T> operator()(const Tensor<T>& x) const;
};

template <class T>
struct DecoderOutput {
  Tensor<T> features;  // (N, C'', H, W)
  Tensor<T> image;     // (N, 3, H, W)
};

/// Per level: deformable convs (ReLU after each), then a stride-2 transposed
/// conv (C -> C/2 -> C''). Final 3x3 conv and a 1x1 projection to RGB.
template <class T>
struct LargeDecoder {
  struct Level {
    std::vector<DeformConv<T>> deforms;
    std::vector<Upsample<T>> up;  // empty on the last level
  };
  std::vector<Level> levels;
  Conv<T> tail;
  Conv<T> head;

  static LargeDecoder make(ParamBuilder<T>& pb, const ModelConfig& cfg);
  DecoderOutput<T> operator()(const Tensor<T>& f) const;
};

/// Per level: deformable conv (ReLU), 1x1 width reduction, ResBlocks at the
/// reduced width, then a stride-2 transposed conv. Final 3x3 conv and head.
template <class T>
struct SmallDecoder {
  struct Level {
    DeformConv<T> deform;
    Conv<T> reduce;
    std::vector<ResBlock<T>> res;
    std::vector<Upsample<T>> up;
  };
  std::vector<Level> levels;
  Conv<T> tail;
  Conv<T> head;

  static SmallDecoder make(ParamBuilder<T>& pb, const ModelConfig& cfg);
  DecoderOutput<T> operator()(const Tensor<T>& f) const;
};

enum class Orientation { kHorizontal, kVertical, kDiagonal, kAntiDiagonal };
inline constexpr Orientation kOrientations[] = {Orientation::kHorizontal, Orientation::kVertical,
                                                Orientation::kDiagonal,
                                                Orientation::kAntiDiagonal};
const char* orientation_name(Orientation o) noexcept;
/// Kernel spec for an orientation filter (1x3, 3x1, or masked 3x3).
ConvSpec orientation_spec(Orientation o, int in, int out);

/// Orientation filters per branch, pairwise fusion per orientation, and a
/// final conv over the four fused maps. Purely linear.
template <class T>
struct OrientationFusion {
  std::vector<Conv<T>> large;  // indexed by Orientation
  std::vector<Conv<T>> small;
  std::vector<Conv<T>> pair;
  Conv<T> out;

  static OrientationFusion make(ParamBuilder<T>& pb, int width);
  Tensor<T> operator()(const Tensor<T>& l, const Tensor<T>& s) const;
  /// Response of one orientation filter of the large branch.
  Tensor<T> filter(Orientation o, const Tensor<T>& x) const;
};

template <class T>
struct ForwardResult {
  Tensor<T> restored;  // I_hat
  Tensor<T> large_image;
  Tensor<T> small_image;
  Tensor<T> large_features;
  Tensor<T> small_features;
  Tensor<T> encoded;
  Tensor<T> large_channel_map;
  Tensor<T> large_spatial_map;
  Tensor<T> small_channel_map;
  Tensor<T> small_spatial_map;
};

struct ForwardOptions {
  bool bypass_attention = false;  // feed encoder features straight to the decoders
};

template <class T>
class CdgNet {
 public:
  CdgNet(const ModelConfig& cfg, std::uint64_t seed);
  CdgNet(const CdgNet&) = delete;
  CdgNet& operator=(const CdgNet&) = delete;
  CdgNet(CdgNet&&) = default;
  CdgNet& operator=(CdgNet&&) = default;

  const ModelConfig& config() const noexcept { return cfg_; }
  ParameterSet<T>& params() noexcept { return params_; }
  const ParameterSet<T>& params() const noexcept { return params_; }

  ForwardResult<T> forward(const Tensor<T>& x, ForwardOptions opts = {}) const;

  const Encoder<T>& encoder() const noexcept { return encoder_; }
  const Acda<T>& large_attention() const noexcept { return acda_large_; }
  const Acda<T>& small_attention() const noexcept { return acda_small_; }
  const LargeDecoder<T>& large_decoder() const noexcept { return large_; }
  const SmallDecoder<T>& small_decoder() const noexcept { return small_; }
  const OrientationFusion<T>& fusion() const noexcept { return fusion_; }

 private:
  ModelConfig cfg_;
  ParameterSet<T> params_;
  Encoder<T> encoder_;
  Acda<T> acda_large_;
  Acda<T> acda_small_;
  LargeDecoder<T> large_;
  SmallDecoder<T> small_;
  OrientationFusion<T> fusion_;
};

/// Bytes of trainable parameters (4 per element) under a name prefix;
/// an empty prefix counts everything.
template <class T>
std::size_t param_bytes(const ParameterSet<T>& set, const std::string& prefix = "");

}  // namespace cdg
