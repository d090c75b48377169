#include <doctest.h>

#include <cmath>
#include <random>

#include "cdgnet/errors.hpp"
#include "cdgnet/kernel_variants.hpp"
#include "cdgnet/kernels.hpp"
#include "cdgnet/ops.hpp"
#include "cdgnet/simd.hpp"
#include "support.hpp"

using namespace cdg;

namespace {

template <class T>
std::vector<T> random_vec(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-1, 1);
  std::vector<T> v(n);
  for (auto& x : v) x = static_cast<T>(d(rng));
  return v;
}

// Relative agreement scaled by the reduction length.
template <class T>
void check_close(const std::vector<T>& a, const std::vector<T>& b, int k) {
  const double tol = (sizeof(T) == 4 ? 2e-6 : 1e-14) * std::max(1, k);
  for (std::size_t i = 0; i < a.size(); ++i)
    REQUIRE(std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i])) <=
            tol * std::max(1.0, std::abs(static_cast<double>(a[i]))));
}

bool have_avx2() { return simd::isa_supported(simd::Isa::kAvx2); }

}  // namespace

TEST_CASE("isa selection") {
  CHECK(simd::isa_supported(simd::Isa::kScalar));
  {
    simd::IsaScope scope(simd::Isa::kScalar);
    CHECK(simd::active_isa() == simd::Isa::kScalar);
  }
  CHECK(simd::isa_name(simd::Isa::kAvx2) == "avx2");
  if (!have_avx2()) CHECK_THROWS_AS(simd::set_active_isa(simd::Isa::kAvx2), ContractError);
}

TEST_CASE_TEMPLATE("avx2 gemm variants agree with the scalar reference", T, float, double) {
  if (!have_avx2()) return;
  const int dims[][3] = {{1, 1, 1}, {3, 5, 7}, {4, 16, 9}, {5, 17, 33}, {8, 64, 27},
                         {13, 31, 8}, {7, 3, 100}, {16, 40, 144}};
  for (const auto& d : dims) {
    const int m = d[0], n = d[1], k = d[2];
    CAPTURE(m);
    CAPTURE(n);
    CAPTURE(k);
    const auto a = random_vec<T>(static_cast<std::size_t>(m) * k, 1);
    const auto b = random_vec<T>(static_cast<std::size_t>(k) * n, 2);
    const auto bt = random_vec<T>(static_cast<std::size_t>(n) * k, 3);
    const auto c0 = random_vec<T>(static_cast<std::size_t>(m) * n, 4);
    for (bool acc : {false, true}) {
      auto cs = c0, cv = c0;
      kernels::scalar::gemm_nn(m, n, k, a.data(), k, b.data(), n, cs.data(), n, acc);
      kernels::avx2::gemm_nn(m, n, k, a.data(), k, b.data(), n, cv.data(), n, acc);
      check_close(cs, cv, k);
      cs = c0, cv = c0;
      // a viewed as [k, m]
      kernels::scalar::gemm_tn(m, n, k, a.data(), m, b.data(), n, cs.data(), n, acc);
      kernels::avx2::gemm_tn(m, n, k, a.data(), m, b.data(), n, cv.data(), n, acc);
      check_close(cs, cv, k);
      cs = c0, cv = c0;
      kernels::scalar::gemm_nt(m, n, k, a.data(), k, bt.data(), k, cs.data(), n, acc);
      kernels::avx2::gemm_nt(m, n, k, a.data(), k, bt.data(), k, cv.data(), n, acc);
      check_close(cs, cv, k);
    }
  }
}

TEST_CASE_TEMPLATE("avx2 elementwise kernels agree with the scalar reference", T, float, double) {
  if (!have_avx2()) return;
  for (std::size_t n : {std::size_t{1}, std::size_t{7}, std::size_t{8}, std::size_t{33},
                        std::size_t{1000}}) {
    const auto x = random_vec<T>(n, 5);
    const auto y = random_vec<T>(n, 6);
    std::vector<T> s(n), v(n);
    kernels::scalar::mul(n, x.data(), y.data(), s.data());
    kernels::avx2::mul(n, x.data(), y.data(), v.data());
    CHECK(s == v);
    kernels::scalar::add(n, x.data(), y.data(), s.data());
    kernels::avx2::add(n, x.data(), y.data(), v.data());
    CHECK(s == v);
    kernels::scalar::relu_forward(n, x.data(), s.data());
    kernels::avx2::relu_forward(n, x.data(), v.data());
    CHECK(s == v);
    s = y, v = y;
    kernels::scalar::relu_backward(n, x.data(), y.data(), s.data());
    kernels::avx2::relu_backward(n, x.data(), y.data(), v.data());
    CHECK(s == v);
    s = y, v = y;
    kernels::scalar::axpy(n, T(0.37), x.data(), s.data());
    kernels::avx2::axpy(n, T(0.37), x.data(), v.data());
    check_close(s, v, 1);
    const double ss = kernels::scalar::sum(n, x.data());
    const double sv = kernels::avx2::sum(n, x.data());
    CHECK(std::abs(ss - sv) <= (sizeof(T) == 4 ? 1e-5 : 1e-13) * static_cast<double>(n));
  }
}

TEST_CASE("conv forward and backward agree across instruction sets") {
  if (!have_avx2()) return;
  auto x = test::random_tensor<float>(Shape{2, 5, 11, 13}, 7);
  auto w = test::random_tensor<float>(Shape{6, 5, 3, 3}, 8);
  auto b = test::random_tensor<float>(Shape{1, 6, 1, 1}, 9);
  auto run = [&](simd::Isa isa) {
    simd::IsaScope scope(isa);
    auto xc = x.clone().set_requires_grad(true);
    auto wc = w.clone().set_requires_grad(true);
    auto y = conv2d(xc, wc, b, 2, 1);
    backward(sum(mul(y, y)));
    return std::tuple{y, std::vector<float>(xc.grad().begin(), xc.grad().end()),
                      std::vector<float>(wc.grad().begin(), wc.grad().end())};
  };
  auto [ys, gxs, gws] = run(simd::Isa::kScalar);
  auto [yv, gxv, gwv] = run(simd::Isa::kAvx2);
  CHECK(test::max_abs_diff(ys.data(), yv.data()) <= 1e-4);
  check_close(gxs, gxv, 1000);
  check_close(gws, gwv, 1000);
}

TEST_CASE("each instruction set is bitwise reproducible") {
  auto x = test::random_tensor<float>(Shape{1, 4, 17, 9}, 10);
  auto w = test::random_tensor<float>(Shape{8, 4, 3, 3}, 11);
  for (auto isa : {simd::Isa::kScalar, simd::Isa::kAvx2}) {
    if (!simd::isa_supported(isa)) continue;
    simd::IsaScope scope(isa);
    CHECK(test::bitwise_equal(conv2d(x, w, Tensor<float>(), 1, 1),
                              conv2d(x, w, Tensor<float>(), 1, 1)));
  }
}
