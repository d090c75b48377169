#pragma once

// The workflows behind the `cdgnet` executable. Each command reports progress
// to `log`, writes its files via temp-and-rename, and throws on failure.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cdgnet/gradcheck_suite.hpp"
#include "cdgnet/model.hpp"

namespace cdg {

namespace fs = std::filesystem;

/// Rebuilds the network a checkpoint was saved from.
CdgNet<float> load_model(const fs::path& checkpoint);

/// Network outputs for one image at its own extents, all in [0, 1].
struct Restoration {
  Tensor<float> image;          // (1, 3, H, W)
  Tensor<float> large_image;    // (1, 3, H, W)
  Tensor<float> small_image;    // (1, 3, H, W)
  Tensor<float> large_spatial;  // (1, 1, H, W), upscaled from H/4 x W/4
  Tensor<float> small_spatial;
  int pad_bottom = 0;  // reflect padding added to reach a multiple of 4
  int pad_right = 0;
};

/// Pads, runs the network without recording a graph, and crops back.
Restoration restore_image(const CdgNet<float>& net, const Tensor<float>& img01);

// ------------------------------------------------------------------- train

struct TrainCommand {
  fs::path data;
  fs::path config;
  fs::path out;
  std::optional<fs::path> resume;
  std::optional<std::uint64_t> seed;  // overrides the config's seed
  int checkpoint_every = 0;
  int log_every = 1;
};

/// `<out>` with its extension replaced by ".metrics.csv".
fs::path metrics_path_for(const fs::path& checkpoint);

void cmd_train(const TrainCommand& cmd, std::ostream& log);

// ------------------------------------------------------------------ deblur

inline constexpr const char* kAuxFiles[] = {"large_image.png", "small_image.png",
                                            "large_spatial_map.png", "small_spatial_map.png"};

struct DeblurCommand {
  fs::path checkpoint;
  fs::path in;
  fs::path out;
  std::optional<fs::path> dump_aux;
};

struct DeblurReport {
  int pad_bottom = 0;
  int pad_right = 0;
  std::vector<fs::path> written;
};

DeblurReport cmd_deblur(const DeblurCommand& cmd, std::ostream& log);

// -------------------------------------------------------------------- eval

struct EvalRow {
  std::string name;
  double psnr = 0;  // +inf for identical images
  double ssim = 0;
};

struct EvalReport {
  std::vector<EvalRow> rows;
  EvalRow mean;  // name "mean"
  std::vector<std::string> skipped;
};

/// Arithmetic means of the per-image metrics.
EvalRow mean_row(const std::vector<EvalRow>& rows);

inline constexpr const char* kEvalHeader = "name,psnr,ssim";

/// One row per image plus the mean row; infinite PSNR is written as "inf".
void write_eval_csv(const fs::path& path, const EvalReport& report);

struct EvalCommand {
  fs::path checkpoint;
  fs::path data;
  fs::path csv;  // empty: next to the checkpoint, extension ".eval.csv"
};

EvalReport cmd_eval(const EvalCommand& cmd, std::ostream& log);

// ---------------------------------------------------------------- diagnose

/// Three blank-line separated sections, each with its own header:
/// "bin_index,count", "radius,log_mag" and "hf_ratio".
void write_diagnostics_csv(const fs::path& path, const Tensor<float>& rgb01);

void cmd_diagnose(const fs::path& in, const fs::path& out, std::ostream& log);

// --------------------------------------------------------------- gradcheck

/// Prints one line per op; returns the ops above tolerance.
std::vector<std::string> cmd_gradcheck(std::uint64_t seed, const std::string& op,
                                       std::ostream& log);

// ------------------------------------------------------------------- synth

struct SynthCommand {
  fs::path out;
  int count = 8;
  int height = 64;
  int width = 64;
  std::uint64_t seed = 0;
};

/// Writes blur/NNNN.png and sharp/NNNN.png pairs under `out`.
void cmd_synth(const SynthCommand& cmd, std::ostream& log);

}  // namespace cdg
