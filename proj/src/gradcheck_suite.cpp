#include "cdgnet/gradcheck_suite.hpp"

#include <chrono>
#include <functional>
#include <random>

#include "cdgnet/blocks.hpp"
#include "cdgnet/errors.hpp"
#include "cdgnet/gradcheck.hpp"
#include "cdgnet/imaging.hpp"
#include "cdgnet/model.hpp"
#include "cdgnet/supervision.hpp"

namespace cdg {

namespace {

using T = double;

class Fixture {
 public:
  explicit Fixture(std::mt19937_64 rng) : rng_(std::move(rng)) {}

  Tensor<T> uniform(Shape s, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> d(lo, hi);
    std::vector<T> v(s.numel());
    for (auto& x : v) x = d(rng_);
    return Tensor<T>(s, std::move(v));
  }

  // Values at least `gap` away from zero, for probing ops with a kink there.
  Tensor<T> away_from_zero(Shape s, double gap) {
    auto t = uniform(s, gap, 1.0);
    std::bernoulli_distribution flip(0.5);
    for (auto& v : t.mutable_data())
      if (flip(rng_)) v = -v;
    return t;
  }

  std::uint64_t seed() { return rng_(); }

  // Zero offsets put every deformable sample on the integer lattice, where
  // bilinear interpolation has a kink; move them off it.
  void scatter_offsets(ParameterSet<T>& set) {
    for (auto& p : set.items())
      if (p.name.find(".offset.") != std::string::npos) {
        auto fresh = uniform(p.value.shape(), -0.3, 0.3);
        auto dst = p.value.mutable_data();
        auto src = fresh.data();
        std::copy(src.begin(), src.end(), dst.begin());
      }
  }

 private:
  std::mt19937_64 rng_;
};

std::vector<GradCheckInput> inputs_of(const ParameterSet<T>& set) {
  std::vector<GradCheckInput> in;
  for (const auto& p : set.items()) in.push_back({p.name, p.value});
  return in;
}

// Contracting with a random probe keeps a plain sum from hiding sign errors.
Tensor<T> contract(const Tensor<T>& y, const Tensor<T>& probe) { return sum(mul(y, probe)); }

ModelConfig toy_config() {
  ModelConfig cfg;
  cfg.channels = 8;
  cfg.small_channels = 4;
  cfg.reduction_ratio = 4;
  return cfg;
}

GradCheckReport check_conv2d(Fixture& fx) {
  auto x = fx.uniform({2, 3, 6, 5});
  auto w = fx.uniform({4, 3, 3, 3});
  auto b = fx.uniform({1, 1, 1, 4});
  auto probe = fx.uniform({2, 4, 3, 3});
  return grad_check([&] { return contract(conv2d(x, w, b, 2, 1), probe); },
                    {{"x", x}, {"weight", w}, {"bias", b}});
}

GradCheckReport check_conv_transpose2d(Fixture& fx) {
  auto x = fx.uniform({1, 3, 3, 4});
  auto w = fx.uniform({3, 2, 4, 4});
  auto b = fx.uniform({1, 1, 1, 2});
  auto probe = fx.uniform({1, 2, 6, 8});
  return grad_check([&] { return contract(conv_transpose2d(x, w, b, 2, 1), probe); },
                    {{"x", x}, {"weight", w}, {"bias", b}});
}

GradCheckReport check_relu(Fixture& fx) {
  auto x = fx.away_from_zero({1, 2, 5, 5}, 0.05);
  auto probe = fx.uniform({1, 2, 5, 5});
  return grad_check([&] { return contract(relu(x), probe); }, {{"x", x}});
}

GradCheckReport check_sigmoid(Fixture& fx) {
  auto x = fx.uniform({1, 2, 5, 5}, -4.0, 4.0);
  auto probe = fx.uniform({1, 2, 5, 5});
  return grad_check([&] { return contract(sigmoid(x), probe); }, {{"x", x}});
}

GradCheckReport check_global_avg_pool(Fixture& fx) {
  auto x = fx.uniform({2, 3, 4, 5});
  auto probe = fx.uniform({2, 3, 1, 1});
  return grad_check([&] { return contract(global_avg_pool(x), probe); }, {{"x", x}});
}

// Product, sum, difference, broadcasting, scaling, concatenation and the
// reductions used by the losses, in one graph.
GradCheckReport check_ewise(Fixture& fx) {
  auto a = fx.uniform({2, 3, 4, 4});
  auto b = fx.uniform({2, 3, 4, 4});
  auto per_channel = fx.uniform({2, 3, 1, 1});
  auto per_pixel = fx.uniform({2, 1, 4, 4});
  auto probe = fx.uniform({2, 6, 4, 4});
  auto f = [&] {
    auto p = mul(mul(a, b), per_channel);
    auto q = sub(add(a, scale(b, T(0.7))), mul(a, per_pixel));
    auto joined = concat(std::vector<Tensor<T>>{p, q});
    return add(contract(joined, probe), add(mean(mul(a, a)), mse_loss(p, q)));
  };
  return grad_check(f, {{"a", a}, {"b", b}, {"per_channel", per_channel}, {"per_pixel", per_pixel}});
}

// A deformable conv whose only weight is the centre tap is pure bilinear
// resampling of the input at the centre offsets.
GradCheckReport check_bilinear(Fixture& fx) {
  auto x = fx.uniform({1, 2, 5, 5});
  auto off = fx.away_from_zero({1, kOffsetChannels, 5, 5}, 0.05);
  for (auto& v : off.mutable_data()) v *= 0.9;
  Tensor<T> w(Shape{2, 2, 3, 3});
  w.mutable_data()[0 * 9 + 4] = 1;  // (0, 0, 1, 1)
  w.mutable_data()[3 * 9 + 4] = 1;  // (1, 1, 1, 1)
  auto probe = fx.uniform({1, 2, 5, 5});
  return grad_check([&] { return contract(deform_conv2d(x, off, w, Tensor<T>()), probe); },
                    {{"x", x}, {"offsets", off}});
}

GradCheckReport check_deform_conv2d(Fixture& fx) {
  auto x = fx.uniform({1, 3, 5, 6});
  auto off = fx.away_from_zero({1, kOffsetChannels, 5, 6}, 0.05);
  for (auto& v : off.mutable_data()) v *= 1.4;
  auto w = fx.uniform({2, 3, 3, 3});
  auto b = fx.uniform({1, 1, 1, 2});
  auto probe = fx.uniform({1, 2, 5, 6});
  return grad_check([&] { return contract(deform_conv2d(x, off, w, b), probe); },
                    {{"x", x}, {"offsets", off}, {"weight", w}, {"bias", b}});
}

template <class Block>
GradCheckReport check_block(Fixture& fx, ParameterSet<T>& set, const Block& block, Shape in,
                            Shape out, std::size_t probes = 0) {
  auto x = fx.uniform(in);
  auto probe = fx.uniform(out);
  auto inputs = inputs_of(set);
  inputs.push_back({"x", x});
  return grad_check([&] { return contract(block(x), probe); }, inputs, {1e-6, probes});
}

GradCheckReport check_resblock(Fixture& fx) {
  ParameterSet<T> set;
  ParamBuilder<T> pb(set, fx.seed());
  auto rb = ResBlock<T>::make(pb, "res", 4);
  return check_block(fx, set, rb, {1, 4, 5, 5}, {1, 4, 5, 5});
}

GradCheckReport check_rdb(Fixture& fx) {
  ParameterSet<T> set;
  ParamBuilder<T> pb(set, fx.seed());
  auto rdb = Rdb<T>::make(pb, "rdb", 4);
  return check_block(fx, set, rdb, {1, 4, 5, 5}, {1, 4, 5, 5}, 40);
}

GradCheckReport check_channel_attention(Fixture& fx) {
  ParameterSet<T> set;
  ParamBuilder<T> pb(set, fx.seed());
  auto ca = ChannelAttention<T>::make(pb, "ca", 8, 4);
  return check_block(fx, set, ca, {2, 8, 4, 4}, {2, 8, 1, 1});
}

GradCheckReport check_spatial_attention(Fixture& fx) {
  ParameterSet<T> set;
  ParamBuilder<T> pb(set, fx.seed());
  auto sa = SpatialAttention<T>::make(pb, "sa", 8);
  fx.scatter_offsets(set);
  return check_block(fx, set, sa, {1, 8, 5, 5}, {1, 1, 5, 5}, 30);
}

GradCheckReport check_acda(Fixture& fx) {
  ParameterSet<T> set;
  ParamBuilder<T> pb(set, fx.seed());
  auto acda = Acda<T>::make(pb, "acda", 8, 4);
  fx.scatter_offsets(set);
  auto features = [&](const Tensor<T>& f) { return acda(f).features; };
  return check_block(fx, set, features, {1, 8, 5, 5}, {1, 8, 5, 5}, 30);
}

GradCheckReport check_large_decoder(Fixture& fx) {
  ParameterSet<T> set;
  ParamBuilder<T> pb(set, fx.seed());
  auto dec = LargeDecoder<T>::make(pb, toy_config());
  fx.scatter_offsets(set);
  auto image = [&](const Tensor<T>& f) { return dec(f).image; };
  return check_block(fx, set, image, {1, 8, 2, 2}, {1, 3, 8, 8});
}

GradCheckReport check_small_decoder(Fixture& fx) {
  ParameterSet<T> set;
  ParamBuilder<T> pb(set, fx.seed());
  auto dec = SmallDecoder<T>::make(pb, toy_config());
  fx.scatter_offsets(set);
  auto image = [&](const Tensor<T>& f) { return dec(f).image; };
  return check_block(fx, set, image, {1, 8, 2, 2}, {1, 3, 8, 8});
}

GradCheckReport check_off(Fixture& fx) {
  ParameterSet<T> set;
  ParamBuilder<T> pb(set, fx.seed());
  auto off = OrientationFusion<T>::make(pb, 4);
  auto l = fx.uniform({1, 4, 5, 6});
  auto s = fx.uniform({1, 4, 5, 6});
  auto probe = fx.uniform({1, 3, 5, 6});
  auto inputs = inputs_of(set);
  inputs.push_back({"large_features", l});
  inputs.push_back({"small_features", s});
  return grad_check([&] { return contract(off(l, s), probe); }, inputs, {1e-6, 12});
}

// Full network on an 8x8 image through the weighted three-term loss.
GradCheckReport check_total_loss(Fixture& fx) {
  CdgNet<T> net(toy_config(), fx.seed());
  fx.scatter_offsets(net.params());
  auto x = fx.uniform({1, 3, 8, 8}, -0.5, 0.5);
  auto gt = fx.uniform({1, 3, 8, 8}, -0.5, 0.5);
  auto mask = fx.uniform({1, 1, 8, 8}, 0.0, 1.0);
  for (auto& v : mask.mutable_data()) v = v > 0.5 ? 1.0 : 0.0;
  auto inputs = inputs_of(net.params());
  inputs.push_back({"input", x});
  auto f = [&] {
    auto r = net.forward(x);
    return total_loss(r.restored, r.large_image, r.small_image, gt, mask).total;
  };
  return grad_check(f, inputs, {1e-6, 24});
}

struct Entry {
  const char* name;
  GradCheckReport (*run)(Fixture&);
};

const Entry kEntries[] = {
    {"conv2d", check_conv2d},
    {"conv_transpose2d", check_conv_transpose2d},
    {"relu", check_relu},
    {"sigmoid", check_sigmoid},
    {"global_avg_pool", check_global_avg_pool},
    {"ewise", check_ewise},
    {"bilinear", check_bilinear},
    {"deform_conv2d", check_deform_conv2d},
    {"resblock", check_resblock},
    {"rdb", check_rdb},
    {"channel_attention", check_channel_attention},
    {"spatial_attention", check_spatial_attention},
    {"acda", check_acda},
    {"large_decoder", check_large_decoder},
    {"small_decoder", check_small_decoder},
    {"off", check_off},
    {"total_loss", check_total_loss},
};

}  // namespace

const std::vector<std::string>& gradcheck_ops() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& e : kEntries) v.emplace_back(e.name);
    return v;
  }();
  return names;
}

std::vector<OpCheck> run_gradcheck_suite(std::uint64_t seed, const std::string& op) {
  bool known = op.empty();
  for (const auto& e : kEntries) known = known || op == e.name;
  if (!known) throw InputError("unknown gradcheck op '" + op + "'");

  std::vector<OpCheck> out;
  std::uint64_t stream = 0;
  for (const auto& e : kEntries) {
    // Each op draws from its own stream so a filtered run matches the full one.
    Fixture fx(derived_rng(seed, stream++));
    if (!op.empty() && op != e.name) continue;
    const auto start = std::chrono::steady_clock::now();
    const auto rep = e.run(fx);
    OpCheck c;
    c.op = e.name;
    c.max_rel_err = rep.max_rel_err;
    c.worst_input = rep.worst_input;
    c.probes = rep.probes;
    c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace cdg
