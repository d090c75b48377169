#pragma once

// Training loop: drop-last batching over a paired dataset, random crops
// redrawn every epoch, Adam updates, metrics log and periodic checkpoints.

#include <filesystem>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "cdgnet/checkpoint.hpp"
#include "cdgnet/config.hpp"
#include "cdgnet/imaging.hpp"

namespace cdg {

/// Network-range tensors for one step: images in [-0.5, 0.5], mask in {0, 1}.
struct Batch {
  Tensor<float> blurry;  // (B, 3, S, S)
  Tensor<float> sharp;
  Tensor<float> mask;  // (B, 1, S, S)
};

/// Crops every listed pair with `rng` and stacks the results.
Batch make_batch(const std::vector<ImagePair>& data, std::span<const std::size_t> indices, int crop,
                 std::mt19937_64& rng);

struct StepLosses {
  double total = 0, rec = 0, small = 0, large = 0;
};

struct EpochMetrics {
  int epoch = 0;
  double lr = 0;
  StepLosses loss;  // means over the epoch's batches
};

class Trainer {
 public:
  /// Throws InputError when the data cannot fill one batch or a crop.
  Trainer(const TrainConfig& cfg, std::vector<ImagePair> data);

  const TrainConfig& config() const noexcept { return cfg_; }
  CdgNet<float>& model() noexcept { return model_; }
  const CdgNet<float>& model() const noexcept { return model_; }
  const Adam<float>& optimizer() const noexcept { return adam_; }
  int epoch() const noexcept { return epoch_; }
  int batches_per_epoch() const noexcept { return static_cast<int>(data_.size()) / cfg_.batch; }

  /// Forward, loss, backward and one Adam update. A non-finite loss raises
  /// NumericError before anything is modified.
  StepLosses step(const Batch& batch, double lr);

  /// One pass over the data at lr_at(epoch); advances the epoch counter.
  /// `on_step` sees each batch's losses as they are computed.
  EpochMetrics run_epoch(const std::function<void(const StepLosses&)>& on_step = {});

  Checkpoint checkpoint(bool with_optimizer = true) const;
  /// Restores parameters, plus optimizer state and epoch when present.
  void restore(const Checkpoint& ck);

 private:
  TrainConfig cfg_;
  std::vector<ImagePair> data_;
  CdgNet<float> model_;
  Adam<float> adam_;
  int epoch_ = 0;
};

struct TrainOptions {
  std::filesystem::path checkpoint;  // written every `checkpoint_every` epochs and at the end
  std::filesystem::path metrics;     // CSV log, rewritten after every epoch
  int checkpoint_every = 0;          // 0: only at the end
  std::function<void(const EpochMetrics&)> on_epoch;
};

/// Runs epochs until the configured count. `history` holds rows from an
/// earlier run being resumed. On a non-finite loss the last good parameters
/// are written to the checkpoint path and NumericError propagates.
std::vector<EpochMetrics> train(Trainer& trainer, const TrainOptions& opts,
                                std::vector<EpochMetrics> history = {});

inline constexpr const char* kMetricsHeader = "epoch,lr,loss_total,loss_rec,loss_s,loss_l";

void write_metrics(const std::filesystem::path& path, const std::vector<EpochMetrics>& rows);
std::vector<EpochMetrics> read_metrics(const std::filesystem::path& path);

}  // namespace cdg
