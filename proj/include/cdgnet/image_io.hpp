#pragma once

// 8-bit PNG reading and writing, plus the write-to-temp-then-rename helper
// every file producer goes through.

#include <filesystem>
#include <functional>
#include <ostream>

#include "cdgnet/tensor.hpp"

namespace cdg {

/// Loads an 8-bit RGB PNG as a (1, 3, H, W) tensor in [0, 1]. Other bit
/// depths or channel layouts raise UnsupportedFormatError.
Tensor<float> load_image(const std::filesystem::path& path);

/// Loads an 8-bit single-channel PNG as a (1, 1, H, W) tensor in [0, 1].
Tensor<float> load_gray_image(const std::filesystem::path& path);

/// Writes a (1, 3, H, W) or (1, 1, H, W) tensor, clamping to [0, 1] and
/// rounding half up to 8 bits.
void save_image(const Tensor<float>& img, const std::filesystem::path& path);

/// 8-bit quantisation used by save_image.
std::uint8_t to_byte(float v) noexcept;

/// Runs `write` against a stream on a sibling temporary file and renames it
/// over `path` only if `write` returns normally.
void write_atomically(const std::filesystem::path& path,
                      const std::function<void(std::ostream&)>& write, bool binary = false);

/// Same, for producers that need a file name rather than a stream.
void replace_atomically(const std::filesystem::path& path,
                        const std::function<void(const std::filesystem::path&)>& write);

}  // namespace cdg
