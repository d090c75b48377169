#pragma once

// Row-major dense kernels used by the convolution family. Each entry point
// dispatches on simd::active_isa(). Every output element is reduced in a
// fixed order for a given ISA, so repeated calls are bitwise reproducible.
//
// `accumulate` selects C += ... instead of C = ....

#include <cstddef>

namespace cdg::kernels {

/// C[m,n] (+)= A[m,k] * B[k,n]
template <class T>
void gemm_nn(int m, int n, int k, const T* a, int lda, const T* b, int ldb, T* c, int ldc,
             bool accumulate);

/// C[m,n] (+)= A[k,m]^T * B[k,n]
template <class T>
void gemm_tn(int m, int n, int k, const T* a, int lda, const T* b, int ldb, T* c, int ldc,
             bool accumulate);

/// C[m,n] (+)= A[m,k] * B[n,k]^T
template <class T>
void gemm_nt(int m, int n, int k, const T* a, int lda, const T* b, int ldb, T* c, int ldc,
             bool accumulate);

/// y += alpha * x
template <class T>
void axpy(std::size_t n, T alpha, const T* x, T* y);

/// out = a * b (elementwise)
template <class T>
void mul(std::size_t n, const T* a, const T* b, T* out);

/// out = a + b
template <class T>
void add(std::size_t n, const T* a, const T* b, T* out);

template <class T>
void relu_forward(std::size_t n, const T* x, T* y);

/// gx += (x > 0) ? gy : 0
template <class T>
void relu_backward(std::size_t n, const T* x, const T* gy, T* gx);

template <class T>
T sum(std::size_t n, const T* x);

}  // namespace cdg::kernels
