#include "cdgnet/layers.hpp"

#include <cmath>

#include "cdgnet/errors.hpp"

namespace cdg {

namespace {

// Variance-scaled weights keep activations O(1) through the long plain conv
// chains of the decoders; biases keep the 1/sqrt(fan_in) range.
double weight_bound(int fan_in, double gain) { return gain * std::sqrt(3.0 / fan_in); }
double bias_bound(int fan_in) { return 1.0 / std::sqrt(static_cast<double>(fan_in)); }

}  // namespace

template <class T>
Conv<T> Conv<T>::make(ParamBuilder<T>& pb, const std::string& name, const ConvSpec& spec) {
  const int taps = spec.kh * spec.kw;
  std::vector<std::uint8_t> mask;
  int active_taps = taps;
  if (!spec.tap_mask.empty()) {
    if (static_cast<int>(spec.tap_mask.size()) != taps)
      throw DimensionError("kernel", "tap mask for '" + name + "' has wrong length");
    active_taps = 0;
    for (auto m : spec.tap_mask) active_taps += m ? 1 : 0;
    mask.reserve(static_cast<std::size_t>(spec.out) * spec.in * taps);
    for (int i = 0; i < spec.out * spec.in; ++i)
      mask.insert(mask.end(), spec.tap_mask.begin(), spec.tap_mask.end());
  }
  const int fan_in = spec.in * active_taps;
  Conv c;
  c.weight = pb.uniform(name + ".weight", {spec.out, spec.in, spec.kh, spec.kw},
                        weight_bound(fan_in, spec.gain), std::move(mask));
  c.bias = pb.uniform(name + ".bias", {spec.out}, bias_bound(fan_in));
  c.geometry.stride = spec.stride;
  c.geometry.pad_h = spec.pad_h < 0 ? spec.kh / 2 : spec.pad_h;
  c.geometry.pad_w = spec.pad_w < 0 ? spec.kw / 2 : spec.pad_w;
  return c;
}

template <class T>
Upsample<T> Upsample<T>::make(ParamBuilder<T>& pb, const std::string& name, int in, int out) {
  // Each output pixel sees 2x2 taps of every input channel.
  const int fan_in = in * 4;
  Upsample u;
  u.weight = pb.uniform(name + ".weight", {in, out, 4, 4}, weight_bound(fan_in, 1.0));
  u.bias = pb.uniform(name + ".bias", {out}, bias_bound(fan_in));
  return u;
}

template <class T>
DeformConv<T> DeformConv<T>::make(ParamBuilder<T>& pb, const std::string& name, int in, int out,
                                  double gain) {
  DeformConv d;
  d.offset.weight = pb.zeros(name + ".offset.weight", {kOffsetChannels, in, 3, 3});
  d.offset.bias = pb.zeros(name + ".offset.bias", {kOffsetChannels});
  d.offset.geometry = Conv2dGeometry{1, 1, 1};
  d.weight = pb.uniform(name + ".weight", {out, in, 3, 3}, weight_bound(in * 9, gain));
  d.bias = pb.uniform(name + ".bias", {out}, bias_bound(in * 9));
  return d;
}

template struct Conv<float>;
template struct Conv<double>;
template struct Upsample<float>;
template struct Upsample<double>;
template struct DeformConv<float>;
template struct DeformConv<double>;

}  // namespace cdg
