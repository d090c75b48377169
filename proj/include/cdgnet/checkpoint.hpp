#pragma once

// Binary checkpoint format (all integers and floats little-endian):
//
//   "CDGN"  u32 version  u32 count
//   count x { u32 name_len, name bytes, u32 rank, rank x u32 extent, f32 data }
//   u8 has_optimizer
//   [ i64 step, i32 epoch, count x f32 first moment, count x f32 second moment ]

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cdgnet/model.hpp"
#include "cdgnet/optim.hpp"

namespace cdg {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointTensor {
  std::string name;
  std::vector<int> dims;
  std::vector<float> data;
};

struct OptimizerSnapshot {
  std::int64_t step = 0;
  std::int32_t epoch = 0;  // next epoch to run
  std::vector<std::vector<float>> first;
  std::vector<std::vector<float>> second;
};

struct Checkpoint {
  std::vector<CheckpointTensor> params;
  std::optional<OptimizerSnapshot> optimizer;
};

/// Copies the parameters, and the optimizer state when given.
Checkpoint make_checkpoint(const ParameterSet<float>& set, const Adam<float>* opt = nullptr,
                           int epoch = 0);

void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& path);

/// Throws CheckpointFormatError (magic/version), CheckpointTruncatedError,
/// or IoError.
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Copies values into `set` in order. The first parameter whose name or
/// extents disagree raises CheckpointShapeError naming it.
template <class T>
void restore_parameters(ParameterSet<T>& set, const Checkpoint& ck);

/// Recovers widths from the stored tensor extents.
ModelConfig infer_model_config(const Checkpoint& ck);

}  // namespace cdg
