#include "cdgnet/model.hpp"

#include "cdgnet/errors.hpp"

namespace cdg {

void ModelConfig::validate() const {
  if (channels < 4 || channels % 4 != 0)
    throw ConfigError("channels must be a positive multiple of 4, got " +
                      std::to_string(channels));
  if (small_channels < 1)
    throw ConfigError("small_channels must be positive, got " + std::to_string(small_channels));
  if (reduction_ratio < 1 || channels % reduction_ratio != 0)
    throw ConfigError("channels (" + std::to_string(channels) +
                      ") must be divisible by reduction_ratio (" +
                      std::to_string(reduction_ratio) + ")");
  if (rdbs_per_stage < 0 || large_deforms_per_level < 1 || small_resblocks_per_level < 0)
    throw ConfigError("invalid block counts");
}

// ------------------------------------------------------------------ encoder

template <class T>
Encoder<T> Encoder<T>::make(ParamBuilder<T>& pb, const ModelConfig& cfg) {
  auto b = pb.scoped("encoder");
  const int widths[] = {cfg.channels / 4, cfg.channels / 2, cfg.channels};
  Encoder e;
  int in = 3;
  for (int s = 0; s < 3; ++s) {
    auto sb = b.scoped("stage" + std::to_string(s));
    Stage st;
    ConvSpec spec{in, widths[s], 3, 3};
    spec.stride = s == 0 ? 1 : 2;
    st.conv = Conv<T>::make(sb, "conv", spec);
    for (int r = 0; r < cfg.rdbs_per_stage; ++r)
      st.rdbs.push_back(Rdb<T>::make(sb, "rdb" + std::to_string(r), widths[s]));
    e.stages.push_back(std::move(st));
    in = widths[s];
  }
  return e;
}

template <class T>
Tensor<T> Encoder<T>::operator()(const Tensor<T>& x) const {
  const Shape& s = x.shape();
  if (s.h % 4 != 0 || s.w % 4 != 0)
    throw InputError("input extents " + std::to_string(s.h) + "x" + std::to_string(s.w) +
                     " are not divisible by 4; pad the image first");
  Tensor<T> h = x;
  for (const auto& st : stages) {
    h = st.conv(h);
    for (const auto& r : st.rdbs) h = r(h);
  }
  return h;
}

// ----------------------------------------------------------------- decoders

namespace {

// Widths entering each of the three decoder levels.
std::vector<int> level_widths(const ModelConfig& cfg) {
  return {cfg.channels, cfg.channels / 2, cfg.small_channels};
}

}  // namespace

template <class T>
LargeDecoder<T> LargeDecoder<T>::make(ParamBuilder<T>& pb, const ModelConfig& cfg) {
  auto b = pb.scoped("large_decoder");
  const auto widths = level_widths(cfg);
  LargeDecoder d;
  for (int l = 0; l < 3; ++l) {
    auto lb = b.scoped("level" + std::to_string(l));
    Level level;
    for (int i = 0; i < cfg.large_deforms_per_level; ++i)
      level.deforms.push_back(
          DeformConv<T>::make(lb, "deform" + std::to_string(i), widths[l], widths[l], kReluGain));
    if (l < 2) level.up.push_back(Upsample<T>::make(lb, "up", widths[l], widths[l + 1]));
    d.levels.push_back(std::move(level));
  }
  const int c = cfg.small_channels;
  d.tail = Conv<T>::make(b, "tail", ConvSpec{c, c, 3, 3});
  d.head = Conv<T>::make(b, "head", ConvSpec{c, 3, 1, 1});
  return d;
}

template <class T>
DecoderOutput<T> LargeDecoder<T>::operator()(const Tensor<T>& f) const {
  Tensor<T> h = f;
  for (const auto& level : levels) {
    for (const auto& d : level.deforms) h = relu(d(h));
    for (const auto& u : level.up) h = u(h);
  }
  DecoderOutput<T> out;
  out.features = tail(h);
  out.image = head(out.features);
  return out;
}

template <class T>
SmallDecoder<T> SmallDecoder<T>::make(ParamBuilder<T>& pb, const ModelConfig& cfg) {
  auto b = pb.scoped("small_decoder");
  const auto widths = level_widths(cfg);
  SmallDecoder d;
  for (int l = 0; l < 3; ++l) {
    auto lb = b.scoped("level" + std::to_string(l));
    const int reduced = l < 2 ? widths[l + 1] : widths[l];
    Level level;
    level.deform = DeformConv<T>::make(lb, "deform", widths[l], widths[l], kReluGain);
    level.reduce = Conv<T>::make(lb, "reduce", ConvSpec{widths[l], reduced, 1, 1});
    for (int i = 0; i < cfg.small_resblocks_per_level; ++i)
      level.res.push_back(ResBlock<T>::make(lb, "res" + std::to_string(i), reduced));
    if (l < 2) level.up.push_back(Upsample<T>::make(lb, "up", reduced, reduced));
    d.levels.push_back(std::move(level));
  }
  const int c = cfg.small_channels;
  d.tail = Conv<T>::make(b, "tail", ConvSpec{c, c, 3, 3});
  d.head = Conv<T>::make(b, "head", ConvSpec{c, 3, 1, 1});
  return d;
}

template <class T>
DecoderOutput<T> SmallDecoder<T>::operator()(const Tensor<T>& f) const {
  Tensor<T> h = f;
  for (const auto& level : levels) {
    h = level.reduce(relu(level.deform(h)));
    for (const auto& r : level.res) h = r(h);
    for (const auto& u : level.up) h = u(h);
  }
  DecoderOutput<T> out;
  out.features = tail(h);
  out.image = head(out.features);
  return out;
}

// ------------------------------------------------------------------- fusion

const char* orientation_name(Orientation o) noexcept {
  switch (o) {
    case Orientation::kHorizontal: return "horizontal";
    case Orientation::kVertical: return "vertical";
    case Orientation::kDiagonal: return "diagonal";
    case Orientation::kAntiDiagonal: return "anti_diagonal";
  }
  return "?";
}

ConvSpec orientation_spec(Orientation o, int in, int out) {
  switch (o) {
    case Orientation::kHorizontal: return ConvSpec{in, out, 1, 3, 1, 0, 1};
    case Orientation::kVertical: return ConvSpec{in, out, 3, 1, 1, 1, 0};
    case Orientation::kDiagonal: return ConvSpec{in, out, 3, 3, 1, 1, 1, {1, 0, 0, 0, 1, 0, 0, 0, 1}};
    case Orientation::kAntiDiagonal:
      return ConvSpec{in, out, 3, 3, 1, 1, 1, {0, 0, 1, 0, 1, 0, 1, 0, 0}};
  }
  return ConvSpec{in, out};
}

template <class T>
OrientationFusion<T> OrientationFusion<T>::make(ParamBuilder<T>& pb, int width) {
  auto b = pb.scoped("fusion");
  OrientationFusion f;
  for (Orientation o : kOrientations)
    f.large.push_back(Conv<T>::make(b, std::string("large.") + orientation_name(o),
                                    orientation_spec(o, width, width)));
  for (Orientation o : kOrientations)
    f.small.push_back(Conv<T>::make(b, std::string("small.") + orientation_name(o),
                                    orientation_spec(o, width, width)));
  for (Orientation o : kOrientations)
    f.pair.push_back(Conv<T>::make(b, std::string("pair.") + orientation_name(o),
                                   ConvSpec{2 * width, width, 3, 3}));
  f.out = Conv<T>::make(b, "out", ConvSpec{4 * width, 3, 3, 3});
  return f;
}

template <class T>
Tensor<T> OrientationFusion<T>::filter(Orientation o, const Tensor<T>& x) const {
  return large[static_cast<int>(o)](x);
}

template <class T>
Tensor<T> OrientationFusion<T>::operator()(const Tensor<T>& l, const Tensor<T>& s) const {
  if (!(l.shape() == s.shape()))
    throw DimensionError("branch", "fusion: branch features " + l.shape().str() + " and " +
                                       s.shape().str() + " differ");
  std::vector<Tensor<T>> fused;
  for (std::size_t i = 0; i < pair.size(); ++i)
    fused.push_back(pair[i](concat(std::vector<Tensor<T>>{large[i](l), small[i](s)})));
  return out(concat(fused));
}

// -------------------------------------------------------------------- model

template <class T>
CdgNet<T>::CdgNet(const ModelConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  cfg_.validate();
  ParamBuilder<T> pb(params_, seed);
  encoder_ = Encoder<T>::make(pb, cfg_);
  acda_large_ = Acda<T>::make(pb, "acda_large", cfg_.channels, cfg_.reduction_ratio);
  acda_small_ = Acda<T>::make(pb, "acda_small", cfg_.channels, cfg_.reduction_ratio);
  large_ = LargeDecoder<T>::make(pb, cfg_);
  small_ = SmallDecoder<T>::make(pb, cfg_);
  fusion_ = OrientationFusion<T>::make(pb, cfg_.small_channels);
}

template <class T>
ForwardResult<T> CdgNet<T>::forward(const Tensor<T>& x, ForwardOptions opts) const {
  if (x.shape().c != 3)
    throw DimensionError("channel", "network input must have 3 channels, got " +
                                        std::to_string(x.shape().c));
  ForwardResult<T> r;
  r.encoded = encoder_(x);
  Tensor<T> fl = r.encoded;
  Tensor<T> fs = r.encoded;
  if (!opts.bypass_attention) {
    auto al = acda_large_(r.encoded);
    auto as = acda_small_(r.encoded);
    fl = al.features;
    fs = as.features;
    r.large_channel_map = al.channel_map;
    r.large_spatial_map = al.spatial_map;
    r.small_channel_map = as.channel_map;
    r.small_spatial_map = as.spatial_map;
  }
  auto dl = large_(fl);
  auto ds = small_(fs);
  r.large_features = dl.features;
  r.large_image = dl.image;
  r.small_features = ds.features;
  r.small_image = ds.image;
  r.restored = fusion_(dl.features, ds.features);
  return r;
}

template <class T>
std::size_t param_bytes(const ParameterSet<T>& set, const std::string& prefix) {
  std::size_t n = 0;
  for (const auto& p : set.items())
    if (p.name.compare(0, prefix.size(), prefix) == 0) n += p.trainable_count();
  return n * 4;
}

template struct Encoder<float>;
template struct Encoder<double>;
template struct LargeDecoder<float>;
template struct LargeDecoder<double>;
template struct SmallDecoder<float>;
template struct SmallDecoder<double>;
template struct OrientationFusion<float>;
template struct OrientationFusion<double>;
template class CdgNet<float>;
template class CdgNet<double>;
template std::size_t param_bytes(const ParameterSet<float>&, const std::string&);
template std::size_t param_bytes(const ParameterSet<double>&, const std::string&);

}  // namespace cdg
