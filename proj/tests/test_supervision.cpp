#include <doctest.h>

#include <filesystem>

#include "cdgnet/errors.hpp"
#include "cdgnet/gradcheck.hpp"
#include "cdgnet/image_io.hpp"
#include "cdgnet/imaging.hpp"
#include "cdgnet/model.hpp"
#include "cdgnet/ops.hpp"
#include "cdgnet/supervision.hpp"
#include "support.hpp"

using namespace cdg;
using test::random_tensor;

namespace {

Tensor<float> step_edge(int h, int w, int col) {
  Tensor<float> img(Shape{1, 3, h, w}, 0.1f);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < h; ++y)
      for (int x = col; x < w; ++x) img.at(0, c, y, x) = 0.9f;
  return img;
}

Tensor<double> random_mask(Shape s, std::uint64_t seed) {
  auto m = random_tensor(s, seed, 0.0, 1.0);
  for (auto& v : m.mutable_data()) v = v > 0.5 ? 1.0 : 0.0;
  return m;
}

}  // namespace

TEST_CASE("sharpness proxy") {
  SUBCASE("constant image gives zero everywhere") {
    const auto s = sharpness_map(Tensor<float>(Shape{1, 3, 24, 20}, 0.4f));
    for (float v : s.data()) REQUIRE(v == 0.0f);
  }
  SUBCASE("a step edge saturates along the edge") {
    const auto s = sharpness_map(step_edge(32, 32, 16));
    CHECK(s.shape() == Shape{1, 1, 32, 32});
    for (int y = 0; y < 32; ++y) {
      CHECK(s(0, 0, y, 15) >= 0.99f);
      CHECK(s(0, 0, y, 0) < 0.01f);
    }
    for (float v : s.data()) REQUIRE((v >= 0.0f && v <= 1.0f));
  }
  SUBCASE("blurring cannot raise the proxy above the blurred sharp proxy") {
    // Gradient and blur commute in the interior, and |k * g| <= k * |g|, so
    // with a shared normaliser the blurred energy is bounded by the sharp
    // energy filtered with the same kernel. It is not bounded pointwise by
    // the sharp energy itself, since blur spreads energy sideways.
    std::mt19937_64 rng(3);
    auto sharp = generate_scene(64, 64, rng);
    const auto k = line_kernel(9, 0.7);
    auto blurred = filter2d(sharp, k);
    const auto es = sharpness_energy(sharp);
    const auto eb = sharpness_energy(blurred);
    const auto bound = filter2d(es.cast<float>(), k);
    for (int y = 16; y < 48; ++y)
      for (int x = 16; x < 48; ++x) REQUIRE(eb(0, 0, y, x) <= bound(0, 0, y, x) + 1e-5);
    const auto scale = sharpness_scales(es);
    const auto ss = normalize_sharpness(es, scale);
    const auto sb = normalize_sharpness(eb, scale);
    CHECK(*std::max_element(sb.data().begin(), sb.data().end()) <=
          *std::max_element(ss.data().begin(), ss.data().end()));
  }
}

TEST_CASE("sharpness mask truth table") {
  CHECK(kDefaultMu == 0.96);
  Tensor<float> s(Shape{1, 1, 1, 5}, {0.97f, 0.96f, 0.5f, 0.0f, 1.0f});
  const auto m = sharpness_mask(s, kDefaultMu);
  const float expect[] = {1, 0, 0, 0, 1};
  for (int i = 0; i < 5; ++i) CHECK(m.data()[i] == expect[i]);
  auto r = random_tensor<float>(Shape{2, 1, 9, 9}, 4, 0.0, 1.0);
  const auto half = sharpness_mask(r, 0.5);
  for (float v : half.data()) REQUIRE((v == 0.0f || v == 1.0f));
}

TEST_CASE("mask files") {
  const auto dir = std::filesystem::temp_directory_path() / "cdg_mask_test";
  std::filesystem::create_directories(dir);
  Tensor<float> m(Shape{1, 1, 4, 4}, 0.0f);
  m.at(0, 0, 1, 2) = 1.0f;
  save_image(m, dir / "ok.png");
  CHECK(test::bitwise_equal(load_mask(dir / "ok.png"), m));
  m.at(0, 0, 0, 0) = 0.5f;
  save_image(m, dir / "bad.png");
  CHECK_THROWS_AS(load_mask(dir / "bad.png"), InputError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("branch targets are complementary") {
  for (int t = 0; t < 100; ++t) {
    Shape s{1 + t % 2, 3, 5 + t % 7, 4 + t % 5};
    const auto gt = random_tensor(s, 100 + t, -0.5, 0.5);
    const auto m = random_mask(Shape{s.n, 1, s.h, s.w}, 300 + t);
    const auto bt = branch_targets(gt, m);
    for (std::size_t i = 0; i < gt.numel(); ++i) REQUIRE(bt.small.data()[i] + bt.large.data()[i] == gt.data()[i]);
  }
  const auto gt = random_tensor(Shape{1, 3, 4, 4}, 7);
  const auto ones = branch_targets(gt, Tensor<double>(Shape{1, 1, 4, 4}, 1.0));
  CHECK(test::bitwise_equal(ones.small, gt));
  for (double v : ones.large.data()) CHECK(v == 0.0);
  const auto zeros = branch_targets(gt, Tensor<double>(Shape{1, 1, 4, 4}, 0.0));
  CHECK(test::bitwise_equal(zeros.large, gt));
  for (double v : zeros.small.data()) CHECK(v == 0.0);
  CHECK_THROWS_AS(branch_targets(gt, Tensor<double>(Shape{1, 1, 4, 5}, 0.0)), DimensionError);
}

TEST_CASE("reconstruction loss") {
  const auto a = random_tensor(Shape{2, 3, 4, 4}, 8);
  CHECK(mse_loss(a, a).item() == 0.0);
  Tensor<double> b(a.shape());
  for (std::size_t i = 0; i < a.numel(); ++i) b.mutable_data()[i] = a.data()[i] - 0.25;
  CHECK(mse_loss(a, b).item() == doctest::Approx(0.0625).epsilon(1e-14));
  CHECK_THROWS_AS(mse_loss(a, random_tensor(Shape{2, 3, 4, 5}, 9)), DimensionError);
}

TEST_CASE("total loss composition") {
  const Shape s{1, 3, 6, 6};
  const auto gt = random_tensor(s, 10, -0.5, 0.5);
  const auto m = random_mask(Shape{1, 1, 6, 6}, 11);
  const auto bt = branch_targets(gt, m);
  SUBCASE("perfect predictions give zero") {
    CHECK(total_loss(gt, bt.large, bt.small, gt, m).total.item() == 0.0);
  }
  SUBCASE("hand values") {
    CHECK(std::abs(combine_losses(1, 2, 3, {}) - 1.5) <= 1e-12);
    // Residuals of 1, sqrt(2) and sqrt(3) against an all-zero mask.
    const Tensor<double> zero_mask(Shape{1, 1, 6, 6}, 0.0);
    const Tensor<double> target(s, 0.0);
    const auto r = total_loss(Tensor<double>(s, 1.0), Tensor<double>(s, std::sqrt(3.0)),
                              Tensor<double>(s, std::sqrt(2.0)), target, zero_mask);
    CHECK(std::abs(r.rec.item() - 1) <= 1e-12);
    CHECK(std::abs(r.small.item() - 2) <= 1e-12);
    CHECK(std::abs(r.large.item() - 3) <= 1e-12);
    CHECK(std::abs(r.total.item() - 1.5) <= 1e-12);
  }
  SUBCASE("zero weights leave the reconstruction term") {
    const auto a = random_tensor(s, 12), b = random_tensor(s, 13), c = random_tensor(s, 14);
    const auto r = total_loss(a, b, c, gt, m, {0.0, 0.0});
    CHECK(r.total.item() == r.rec.item());
    CHECK_THROWS_AS(total_loss(a, b, c, gt, m, {-0.1, 0.1}), ConfigError);
  }
  SUBCASE("non-negative, zero only at zero residuals") {
    for (int t = 0; t < 50; ++t) {
      const auto a = random_tensor(s, 20 + t), b = random_tensor(s, 80 + t),
                 c = random_tensor(s, 140 + t);
      CHECK(total_loss(a, b, c, gt, m).total.item() > 0.0);
    }
  }
  SUBCASE("gradients") {
    auto a = random_tensor(s, 15), b = random_tensor(s, 16), c = random_tensor(s, 17);
    const auto rep = grad_check([&] { return total_loss(a, b, c, gt, m).total; },
                                {{"restored", a}, {"large", b}, {"small", c}});
    CHECK(rep.max_rel_err <= 1e-6);
  }
}

TEST_CASE("degenerate masks still train both heads") {
  ModelConfig cfg;
  cfg.channels = 8;
  cfg.small_channels = 4;
  cfg.reduction_ratio = 4;
  for (double fill : {0.0, 1.0}) {
    CdgNet<double> net(cfg, 18);
    const auto x = random_tensor(Shape{1, 3, 8, 8}, 19, -0.5, 0.5);
    const auto gt = random_tensor(Shape{1, 3, 8, 8}, 20, -0.5, 0.5);
    const Tensor<double> mask(Shape{1, 1, 8, 8}, fill);
    const auto r = net.forward(x);
    backward(total_loss(r.restored, r.large_image, r.small_image, gt, mask).total);
    for (const char* head : {"large_decoder.head.weight", "small_decoder.head.weight",
                             "large_decoder.tail.weight", "small_decoder.tail.weight"}) {
      CAPTURE(head);
      double norm = 0;
      for (double g : net.params().find(head)->value.grad()) norm += g * g;
      CHECK(norm > 0.0);
    }
  }
}
