#include <atomic>
#include <cstdlib>
#include <string>

#include "cdgnet/errors.hpp"
#include "cdgnet/kernel_variants.hpp"
#include "cdgnet/kernels.hpp"
#include "cdgnet/simd.hpp"

namespace cdg::simd {

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::kAvx2: return "avx2";
    case Isa::kScalar: break;
  }
  return "scalar";
}

bool isa_supported(Isa isa) noexcept {
  switch (isa) {
    case Isa::kScalar: return true;
    case Isa::kAvx2:
#if CDG_ARCH_X86 && (defined(__GNUC__) || defined(__clang__))
      return kernels::avx2::compiled() && __builtin_cpu_supports("avx2") &&
             __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

Isa detected_isa() noexcept { return isa_supported(Isa::kAvx2) ? Isa::kAvx2 : Isa::kScalar; }

namespace {

Isa initial_isa() noexcept {
  if (const char* env = std::getenv("CDG_ISA")) {
    const std::string_view v(env);
    if (v == "scalar") return Isa::kScalar;
    if (v == "avx2" && isa_supported(Isa::kAvx2)) return Isa::kAvx2;
  }
  return detected_isa();
}

std::atomic<Isa>& active() {
  static std::atomic<Isa> isa{initial_isa()};
  return isa;
}

}  // namespace

Isa active_isa() noexcept { return active().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
  if (!isa_supported(isa))
    throw ContractError("instruction set '" + std::string(isa_name(isa)) +
                        "' is not available on this machine");
  active().store(isa, std::memory_order_relaxed);
}

IsaScope::IsaScope(Isa isa) : previous_(active_isa()) { set_active_isa(isa); }
IsaScope::~IsaScope() { active().store(previous_, std::memory_order_relaxed); }

}  // namespace cdg::simd

namespace cdg::kernels {

namespace {
bool use_avx2() noexcept { return simd::active_isa() == simd::Isa::kAvx2; }
}  // namespace

#define CDG_DISPATCH(fn, ...) \
  (use_avx2() ? avx2::fn<T>(__VA_ARGS__) : scalar::fn<T>(__VA_ARGS__))

template <class T>
void gemm_nn(int m, int n, int k, const T* a, int lda, const T* b, int ldb, T* c, int ldc,
             bool accumulate) {
  if (m <= 0 || n <= 0) return;
  CDG_DISPATCH(gemm_nn, m, n, k, a, lda, b, ldb, c, ldc, accumulate);
}

template <class T>
void gemm_tn(int m, int n, int k, const T* a, int lda, const T* b, int ldb, T* c, int ldc,
             bool accumulate) {
  if (m <= 0 || n <= 0) return;
  CDG_DISPATCH(gemm_tn, m, n, k, a, lda, b, ldb, c, ldc, accumulate);
}

template <class T>
void gemm_nt(int m, int n, int k, const T* a, int lda, const T* b, int ldb, T* c, int ldc,
             bool accumulate) {
  if (m <= 0 || n <= 0) return;
  CDG_DISPATCH(gemm_nt, m, n, k, a, lda, b, ldb, c, ldc, accumulate);
}

template <class T>
void axpy(std::size_t n, T alpha, const T* x, T* y) {
  CDG_DISPATCH(axpy, n, alpha, x, y);
}

template <class T>
void mul(std::size_t n, const T* a, const T* b, T* out) {
  CDG_DISPATCH(mul, n, a, b, out);
}

template <class T>
void add(std::size_t n, const T* a, const T* b, T* out) {
  CDG_DISPATCH(add, n, a, b, out);
}

template <class T>
void relu_forward(std::size_t n, const T* x, T* y) {
  CDG_DISPATCH(relu_forward, n, x, y);
}

template <class T>
void relu_backward(std::size_t n, const T* x, const T* gy, T* gx) {
  CDG_DISPATCH(relu_backward, n, x, gy, gx);
}

template <class T>
T sum(std::size_t n, const T* x) {
  return CDG_DISPATCH(sum, n, x);
}

#undef CDG_DISPATCH

#define CDG_INSTANTIATE(T)                                                                    \
  template void gemm_nn<T>(int, int, int, const T*, int, const T*, int, T*, int, bool);       \
  template void gemm_tn<T>(int, int, int, const T*, int, const T*, int, T*, int, bool);       \
  template void gemm_nt<T>(int, int, int, const T*, int, const T*, int, T*, int, bool);       \
  template void axpy<T>(std::size_t, T, const T*, T*);                                        \
  template void mul<T>(std::size_t, const T*, const T*, T*);                                  \
  template void add<T>(std::size_t, const T*, const T*, T*);                                  \
  template void relu_forward<T>(std::size_t, const T*, T*);                                   \
  template void relu_backward<T>(std::size_t, const T*, const T*, T*);                        \
  template T sum<T>(std::size_t, const T*);

CDG_INSTANTIATE(float)
CDG_INSTANTIATE(double)
#undef CDG_INSTANTIATE

}  // namespace cdg::kernels
