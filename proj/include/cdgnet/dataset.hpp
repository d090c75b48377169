#pragma once

// Paired dataset directories: root/blur/*.png matched with root/sharp/*.png
// by file name, with optional externally computed masks in root/mask/.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cdgnet/imaging.hpp"

namespace cdg {

struct PairPaths {
  std::string name;
  std::filesystem::path blurry;
  std::filesystem::path sharp;
};

struct DatasetScan {
  std::vector<PairPaths> pairs;        // sorted by name
  std::vector<std::string> unpaired;   // present on one side only
};

/// Throws IoError when either subdirectory is missing.
DatasetScan scan_dataset(const std::filesystem::path& root);

/// Loads every pair and attaches its mask: root/mask/<name> when present,
/// otherwise the thresholded sharpness proxy of the blurry image.
std::vector<ImagePair> load_pairs(const std::filesystem::path& root, const DatasetScan& scan,
                                  double mu);

/// Writes blur/<id>, sharp/<id> (and mask/<id> when the mask is defined).
void write_pair(const std::filesystem::path& root, const ImagePair& pair);

/// A blurred/sharp pair from a random scene and random blur field. Each pair
/// draws from its own stream derived from (seed, index).
ImagePair synth_pair(int height, int width, std::uint64_t seed, std::uint64_t index,
                     const BlurFieldOptions& opts = {});

}  // namespace cdg
