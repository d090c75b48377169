#include "cdgnet/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "cdgnet/errors.hpp"

namespace cdg {

namespace fs = std::filesystem;

namespace {

struct PngReader {
  png_image image{};
  PngReader() { image.version = PNG_IMAGE_VERSION; }
  ~PngReader() { png_image_free(&image); }
};

// Reads an 8-bit PNG whose stored layout has exactly `channels` colour
// channels and no alpha; returns the raw bytes in row-major interleaved order.
std::vector<png_byte> read_png(const fs::path& path, int channels, int& height, int& width) {
  if (!fs::exists(path)) throw IoError("cannot open '" + path.string() + "': no such file");
  PngReader r;
  if (!png_image_begin_read_from_file(&r.image, path.c_str()))
    throw IoError("cannot read PNG '" + path.string() + "': " + r.image.message);
  const auto fmt = r.image.format;
  if (fmt & PNG_FORMAT_FLAG_LINEAR)
    throw UnsupportedFormatError("'" + path.string() + "' is a 16-bit PNG; only 8-bit is supported");
  const bool colour = fmt & PNG_FORMAT_FLAG_COLOR;
  const bool alpha = fmt & PNG_FORMAT_FLAG_ALPHA;
  if (alpha || colour != (channels == 3))
    throw UnsupportedFormatError("'" + path.string() + "' must be an 8-bit " +
                                 (channels == 3 ? "RGB" : "single-channel") + " PNG without alpha");
  r.image.format = channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  height = static_cast<int>(r.image.height);
  width = static_cast<int>(r.image.width);
  std::vector<png_byte> buf(PNG_IMAGE_SIZE(r.image));
  if (!png_image_finish_read(&r.image, nullptr, buf.data(), 0, nullptr))
    throw IoError("cannot decode PNG '" + path.string() + "': " + r.image.message);
  return buf;
}

Tensor<float> to_tensor(const std::vector<png_byte>& buf, int c, int h, int w) {
  Tensor<float> t(Shape{1, c, h, w});
  auto d = t.mutable_data();
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  for (std::size_t p = 0; p < plane; ++p)
    for (int k = 0; k < c; ++k) d[k * plane + p] = buf[p * c + k] / 255.0f;
  return t;
}

}  // namespace

Tensor<float> load_image(const fs::path& path) {
  int h = 0, w = 0;
  auto buf = read_png(path, 3, h, w);
  return to_tensor(buf, 3, h, w);
}

Tensor<float> load_gray_image(const fs::path& path) {
  int h = 0, w = 0;
  auto buf = read_png(path, 1, h, w);
  return to_tensor(buf, 1, h, w);
}

std::uint8_t to_byte(float v) noexcept {
  const float c = std::clamp(std::isnan(v) ? 0.0f : v, 0.0f, 1.0f);
  return static_cast<std::uint8_t>(std::floor(c * 255.0f + 0.5f));
}

void save_image(const Tensor<float>& img, const fs::path& path) {
  const Shape s = img.shape();
  if (s.n != 1 || (s.c != 1 && s.c != 3))
    throw DimensionError("channel", "save_image expects (1, 1|3, H, W), got " + s.str());
  const std::size_t plane = s.plane();
  std::vector<png_byte> buf(plane * s.c);
  auto d = img.data();
  for (std::size_t p = 0; p < plane; ++p)
    for (int k = 0; k < s.c; ++k) buf[p * s.c + k] = to_byte(d[k * plane + p]);
  replace_atomically(path, [&](const fs::path& tmp) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(s.w);
    image.height = static_cast<png_uint_32>(s.h);
    image.format = s.c == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    const bool ok = png_image_write_to_file(&image, tmp.c_str(), 0, buf.data(), 0, nullptr);
    const std::string msg = image.message;
    png_image_free(&image);
    if (!ok) throw IoError("cannot write PNG '" + path.string() + "': " + msg);
  });
}

void replace_atomically(const fs::path& path,
                        const std::function<void(const fs::path&)>& write) {
  fs::path tmp = path;
  tmp += ".tmp";
  try {
    write(tmp);
    fs::rename(tmp, path);
  } catch (...) {
    std::error_code ec;
    fs::remove(tmp, ec);
    throw;
  }
}

void write_atomically(const fs::path& path, const std::function<void(std::ostream&)>& write,
                      bool binary) {
  replace_atomically(path, [&](const fs::path& tmp) {
    std::ofstream out(tmp, binary ? std::ios::binary : std::ios::out);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    write(out);
    out.flush();
    if (!out) throw IoError("write to '" + tmp.string() + "' failed");
  });
}

}  // namespace cdg
