#pragma once

// Run configuration, read from plain key=value text. Blank lines and lines
// starting with '#' are ignored; unknown keys are rejected.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "cdgnet/model.hpp"
#include "cdgnet/supervision.hpp"

namespace cdg {

struct TrainConfig {
  ModelConfig model;
  double mu = kDefaultMu;
  LossWeights weights;
  double lr = 1e-4;
  double lr_decay = 0.5;
  int lr_step = 500;
  int epochs = 3000;
  int batch = 6;
  int crop = 256;
  std::uint64_t seed = 0;

  /// Throws ConfigError on out-of-range values.
  void validate() const;
  double lr_for_epoch(int epoch) const;
};

/// Throws ConfigError naming the offending key or line.
TrainConfig parse_config(std::istream& in);
TrainConfig load_config(const std::filesystem::path& path);

/// Every key with its current value, one per line, in parse_config syntax.
std::string format_config(const TrainConfig& cfg);

}  // namespace cdg
