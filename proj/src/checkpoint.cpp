#include "cdgnet/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "cdgnet/errors.hpp"
#include "cdgnet/image_io.hpp"

namespace cdg {

namespace fs = std::filesystem;

namespace {

constexpr char kMagic[4] = {'C', 'D', 'G', 'N'};

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}
  template <class U>
  void integer(U v) {
    using Bits = std::make_unsigned_t<U>;
    auto b = static_cast<Bits>(v);
    char bytes[sizeof(U)];
    for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<char>((b >> (8 * i)) & 0xff);
    out_.write(bytes, sizeof(U));
  }
  void floats(const std::vector<float>& v) {
    for (float f : v) integer(std::bit_cast<std::uint32_t>(f));
  }
  void bytes(const void* p, std::size_t n) { out_.write(static_cast<const char*>(p), n); }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  Reader(std::vector<char> buf, std::string path) : buf_(std::move(buf)), path_(std::move(path)) {}
  void need(std::size_t n, const char* what) {
    if (buf_.size() - pos_ < n)
      throw CheckpointTruncatedError("checkpoint '" + path_ + "' is truncated while reading " + what);
  }
  template <class U>
  U integer(const char* what) {
    need(sizeof(U), what);
    std::make_unsigned_t<U> v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i)
      v |= static_cast<std::make_unsigned_t<U>>(static_cast<unsigned char>(buf_[pos_ + i])) << (8 * i);
    pos_ += sizeof(U);
    return static_cast<U>(v);
  }
  std::vector<float> floats(std::size_t n, const char* what) {
    need(n * 4, what);
    std::vector<float> v(n);
    for (auto& f : v) f = std::bit_cast<float>(integer<std::uint32_t>(what));
    return v;
  }
  std::string text(std::size_t n, const char* what) {
    need(n, what);
    std::string s(buf_.data() + pos_, n);
    pos_ += n;
    return s;
  }
  bool at_end() const { return pos_ == buf_.size(); }

 private:
  std::vector<char> buf_;
  std::size_t pos_ = 0;
  std::string path_;
};

}  // namespace

Checkpoint make_checkpoint(const ParameterSet<float>& set, const Adam<float>* opt, int epoch) {
  Checkpoint ck;
  for (const auto& p : set.items())
    ck.params.push_back({p.name, p.dims, {p.value.data().begin(), p.value.data().end()}});
  if (opt) ck.optimizer = OptimizerSnapshot{opt->steps(), epoch, opt->first_moments(), opt->second_moments()};
  return ck;
}

void save_checkpoint(const Checkpoint& ck, const fs::path& path) {
  write_atomically(
      path,
      [&](std::ostream& out) {
        Writer w(out);
        w.bytes(kMagic, 4);
        w.integer<std::uint32_t>(kCheckpointVersion);
        w.integer<std::uint32_t>(static_cast<std::uint32_t>(ck.params.size()));
        for (const auto& t : ck.params) {
          w.integer<std::uint32_t>(static_cast<std::uint32_t>(t.name.size()));
          w.bytes(t.name.data(), t.name.size());
          w.integer<std::uint32_t>(static_cast<std::uint32_t>(t.dims.size()));
          for (int d : t.dims) w.integer<std::uint32_t>(static_cast<std::uint32_t>(d));
          w.floats(t.data);
        }
        w.integer<std::uint8_t>(ck.optimizer ? 1 : 0);
        if (ck.optimizer) {
          w.integer<std::int64_t>(ck.optimizer->step);
          w.integer<std::int32_t>(ck.optimizer->epoch);
          for (const auto& m : ck.optimizer->first) w.floats(m);
          for (const auto& v : ck.optimizer->second) w.floats(v);
        }
      },
      true);
}

Checkpoint load_checkpoint(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint '" + path.string() + "'");
  Reader r({std::istreambuf_iterator<char>(in), {}}, path.string());
  if (r.text(4, "magic") != std::string(kMagic, 4))
    throw CheckpointFormatError("'" + path.string() + "' is not a checkpoint (bad magic)");
  const auto version = r.integer<std::uint32_t>("version");
  if (version != kCheckpointVersion)
    throw CheckpointFormatError("checkpoint '" + path.string() + "' has version " +
                                std::to_string(version) + ", expected " +
                                std::to_string(kCheckpointVersion));
  Checkpoint ck;
  const auto count = r.integer<std::uint32_t>("parameter count");
  for (std::uint32_t k = 0; k < count; ++k) {
    CheckpointTensor t;
    t.name = r.text(r.integer<std::uint32_t>("name length"), "name");
    const auto rank = r.integer<std::uint32_t>("rank");
    if (rank > 4) throw CheckpointFormatError("parameter '" + t.name + "' has rank " + std::to_string(rank));
    std::size_t n = 1;
    for (std::uint32_t i = 0; i < rank; ++i) {
      t.dims.push_back(static_cast<int>(r.integer<std::uint32_t>("extent")));
      n *= static_cast<std::size_t>(t.dims.back());
    }
    t.data = r.floats(n, "parameter data");
    ck.params.push_back(std::move(t));
  }
  const auto flag = r.integer<std::uint8_t>("optimizer flag");
  if (flag > 1) throw CheckpointFormatError("bad optimizer flag in '" + path.string() + "'");
  if (flag) {
    OptimizerSnapshot s;
    s.step = r.integer<std::int64_t>("optimizer step");
    s.epoch = r.integer<std::int32_t>("epoch");
    for (const auto& t : ck.params) s.first.push_back(r.floats(t.data.size(), "first moments"));
    for (const auto& t : ck.params) s.second.push_back(r.floats(t.data.size(), "second moments"));
    ck.optimizer = std::move(s);
  }
  if (!r.at_end()) throw CheckpointFormatError("trailing bytes after checkpoint '" + path.string() + "'");
  return ck;
}

template <class T>
void restore_parameters(ParameterSet<T>& set, const Checkpoint& ck) {
  auto& items = set.items();
  for (std::size_t k = 0; k < items.size(); ++k) {
    auto& p = items[k];
    if (k >= ck.params.size())
      throw CheckpointShapeError(p.name, "checkpoint has no entry for parameter '" + p.name + "'");
    const auto& t = ck.params[k];
    if (t.name != p.name || t.dims != p.dims) {
      auto dims = [](const std::vector<int>& d) {
        std::string s = "(";
        for (std::size_t i = 0; i < d.size(); ++i) s += (i ? ", " : "") + std::to_string(d[i]);
        return s + ")";
      };
      throw CheckpointShapeError(p.name, "parameter '" + p.name + "' " + dims(p.dims) +
                                             " does not match checkpoint entry '" + t.name + "' " +
                                             dims(t.dims));
    }
  }
  if (ck.params.size() != items.size())
    throw CheckpointShapeError(ck.params[items.size()].name,
                               "checkpoint has extra parameter '" + ck.params[items.size()].name + "'");
  for (std::size_t k = 0; k < items.size(); ++k) {
    auto dst = items[k].value.mutable_data();
    const auto& src = ck.params[k].data;
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = static_cast<T>(src[i]);
  }
}

ModelConfig infer_model_config(const Checkpoint& ck) {
  auto dims_of = [&](const std::string& name) -> const std::vector<int>& {
    for (const auto& t : ck.params)
      if (t.name == name) return t.dims;
    throw CheckpointFormatError("checkpoint lacks '" + name + "'; cannot infer the model widths");
  };
  ModelConfig cfg;
  cfg.channels = dims_of("encoder.stage2.conv.weight").at(0);
  cfg.small_channels = dims_of("large_decoder.head.weight").at(1);
  cfg.reduction_ratio = cfg.channels / dims_of("acda_large.channel.squeeze.weight").at(0);
  return cfg;
}

template void restore_parameters(ParameterSet<float>&, const Checkpoint&);
template void restore_parameters(ParameterSet<double>&, const Checkpoint&);

}  // namespace cdg
