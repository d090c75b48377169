// Reference kernels. Plain loops, no explicit vectorisation; the reduction
// order for each output element is the natural index order.

#include <algorithm>

#include "cdgnet/kernel_variants.hpp"

namespace cdg::kernels::scalar {

template <class T>
void gemm_nn(int m, int n, int k, const T* a, int lda, const T* b, int ldb, T* c, int ldc,
             bool accumulate) {
  for (int i = 0; i < m; ++i) {
    T* crow = c + static_cast<std::size_t>(i) * ldc;
    if (!accumulate) std::fill(crow, crow + n, T(0));
    const T* arow = a + static_cast<std::size_t>(i) * lda;
    for (int p = 0; p < k; ++p) {
      const T av = arow[p];
      const T* brow = b + static_cast<std::size_t>(p) * ldb;
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

template <class T>
void gemm_tn(int m, int n, int k, const T* a, int lda, const T* b, int ldb, T* c, int ldc,
             bool accumulate) {
  for (int i = 0; i < m; ++i) {
    T* crow = c + static_cast<std::size_t>(i) * ldc;
    if (!accumulate) std::fill(crow, crow + n, T(0));
    for (int p = 0; p < k; ++p) {
      const T av = a[static_cast<std::size_t>(p) * lda + i];
      const T* brow = b + static_cast<std::size_t>(p) * ldb;
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

template <class T>
void gemm_nt(int m, int n, int k, const T* a, int lda, const T* b, int ldb, T* c, int ldc,
             bool accumulate) {
  for (int i = 0; i < m; ++i) {
    const T* arow = a + static_cast<std::size_t>(i) * lda;
    for (int j = 0; j < n; ++j) {
      const T* brow = b + static_cast<std::size_t>(j) * ldb;
      T s = T(0);
      for (int p = 0; p < k; ++p) s += arow[p] * brow[p];
      T& out = c[static_cast<std::size_t>(i) * ldc + j];
      out = accumulate ? out + s : s;
    }
  }
}

template <class T>
void axpy(std::size_t n, T alpha, const T* x, T* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

template <class T>
void mul(std::size_t n, const T* a, const T* b, T* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

template <class T>
void add(std::size_t n, const T* a, const T* b, T* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

template <class T>
void relu_forward(std::size_t n, const T* x, T* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
}

template <class T>
void relu_backward(std::size_t n, const T* x, const T* gy, T* gx) {
  for (std::size_t i = 0; i < n; ++i)
    if (x[i] > T(0)) gx[i] += gy[i];
}

template <class T>
T sum(std::size_t n, const T* x) {
  T s = T(0);
  for (std::size_t i = 0; i < n; ++i) s += x[i];
  return s;
}

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

}  // namespace cdg::kernels::scalar
