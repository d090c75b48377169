#pragma once

// Per-ISA kernel entry points. Production code goes through kernels.hpp;
// these are exposed so the variants can be tested against each other.

#include <cstddef>

#define CDG_DECLARE_KERNEL_VARIANTS                                                          \
  template <class T>                                                                         \
  void gemm_nn(int m, int n, int k, const T* a, int lda, const T* b, int ldb, T* c, int ldc, \
               bool accumulate);                                                             \
  template <class T>                                                                         \
  void gemm_tn(int m, int n, int k, const T* a, int lda, const T* b, int ldb, T* c, int ldc, \
               bool accumulate);                                                             \
  template <class T>                                                                         \
  void gemm_nt(int m, int n, int k, const T* a, int lda, const T* b, int ldb, T* c, int ldc, \
               bool accumulate);                                                             \
  template <class T>                                                                         \
  void axpy(std::size_t n, T alpha, const T* x, T* y);                                       \
  template <class T>                                                                         \
  void mul(std::size_t n, const T* a, const T* b, T* out);                                   \
  template <class T>                                                                         \
  void add(std::size_t n, const T* a, const T* b, T* out);                                   \
  template <class T>                                                                         \
  void relu_forward(std::size_t n, const T* x, T* y);                                        \
  template <class T>                                                                         \
  void relu_backward(std::size_t n, const T* x, const T* gy, T* gx);                         \
  template <class T>                                                                         \
  T sum(std::size_t n, const T* x);

namespace cdg::kernels::scalar {
CDG_DECLARE_KERNEL_VARIANTS
}  // namespace cdg::kernels::scalar

namespace cdg::kernels::avx2 {
CDG_DECLARE_KERNEL_VARIANTS
/// False when the variant was not compiled into this binary.
bool compiled() noexcept;
}  // namespace cdg::kernels::avx2

#undef CDG_DECLARE_KERNEL_VARIANTS
