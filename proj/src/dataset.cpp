#include "cdgnet/dataset.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "cdgnet/errors.hpp"
#include "cdgnet/image_io.hpp"
#include "cdgnet/supervision.hpp"

namespace cdg {

namespace fs = std::filesystem;

namespace {

std::set<std::string> png_names(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("dataset directory '" + dir.string() + "' is missing");
  std::set<std::string> names;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".png")
      names.insert(e.path().filename().string());
  return names;
}

}  // namespace

DatasetScan scan_dataset(const fs::path& root) {
  const auto blur = png_names(root / "blur");
  const auto sharp = png_names(root / "sharp");
  DatasetScan scan;
  for (const auto& n : blur) {
    if (sharp.count(n))
      scan.pairs.push_back({n, root / "blur" / n, root / "sharp" / n});
    else
      scan.unpaired.push_back("blur/" + n);
  }
  for (const auto& n : sharp)
    if (!blur.count(n)) scan.unpaired.push_back("sharp/" + n);
  return scan;
}

std::vector<ImagePair> load_pairs(const fs::path& root, const DatasetScan& scan, double mu) {
  std::vector<ImagePair> out;
  for (const auto& p : scan.pairs) {
    ImagePair pair;
    pair.id = p.name;
    pair.blurry = load_image(p.blurry);
    pair.sharp = load_image(p.sharp);
    if (!(pair.blurry.shape() == pair.sharp.shape()))
      throw InputError("pair '" + p.name + "' has mismatched extents " +
                       pair.blurry.shape().str() + " vs " + pair.sharp.shape().str());
    const fs::path mask = root / "mask" / p.name;
    pair.mask = fs::exists(mask) ? load_mask(mask)
                                 : sharpness_mask(sharpness_map(pair.blurry), mu);
    if (pair.mask.shape().h != pair.sharp.shape().h || pair.mask.shape().w != pair.sharp.shape().w)
      throw InputError("mask for '" + p.name + "' has the wrong extents");
    out.push_back(std::move(pair));
  }
  return out;
}

void write_pair(const fs::path& root, const ImagePair& pair) {
  fs::create_directories(root / "blur");
  fs::create_directories(root / "sharp");
  save_image(pair.blurry, root / "blur" / pair.id);
  save_image(pair.sharp, root / "sharp" / pair.id);
  if (pair.mask.defined()) {
    fs::create_directories(root / "mask");
    save_image(pair.mask, root / "mask" / pair.id);
  }
}

ImagePair synth_pair(int height, int width, std::uint64_t seed, std::uint64_t index,
                     const BlurFieldOptions& opts) {
  auto rng = derived_rng(seed, index);
  ImagePair p;
  p.sharp = generate_scene(height, width, rng);
  p.blurry = synth_blur(p.sharp, random_blur_field(height, width, rng, opts), rng);
  return p;
}

}  // namespace cdg
