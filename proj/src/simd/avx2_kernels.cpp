// AVX2/FMA kernel variants.
//
// This translation unit is compiled with -mavx2 -mfma. It must not
// instantiate inline templates shared with other translation units (no
// standard containers or algorithms), otherwise the linker may pick an AVX2
// copy for code that runs on CPUs without it. Everything here works on raw
// pointers and file-local helpers.

#include "cdgnet/kernel_variants.hpp"

#if defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>
#define CDG_HAVE_AVX2 1
#else
#define CDG_HAVE_AVX2 0
#endif

namespace cdg::kernels::avx2 {

bool compiled() noexcept { return CDG_HAVE_AVX2 != 0; }

#if CDG_HAVE_AVX2

namespace {

template <class T>
struct Vec;

template <>
struct Vec<float> {
  using R = __m256;
  static constexpr int kLanes = 8;
  static R zero() { return _mm256_setzero_ps(); }
  static R set1(float v) { return _mm256_set1_ps(v); }
  static R load(const float* p) { return _mm256_loadu_ps(p); }
  static void store(float* p, R v) { _mm256_storeu_ps(p, v); }
  static R fmadd(R a, R b, R c) { return _mm256_fmadd_ps(a, b, c); }
  static R add(R a, R b) { return _mm256_add_ps(a, b); }
  static R mul(R a, R b) { return _mm256_mul_ps(a, b); }
  static R max(R a, R b) { return _mm256_max_ps(a, b); }
  // gy where x > 0, else 0
  static R select_positive(R x, R gy) {
    return _mm256_and_ps(_mm256_cmp_ps(x, _mm256_setzero_ps(), _CMP_GT_OQ), gy);
  }
  static float hsum(R v) {
    const __m128 lo = _mm256_castps256_ps128(v);
    const __m128 hi = _mm256_extractf128_ps(v, 1);
    __m128 s = _mm_add_ps(lo, hi);
    s = _mm_add_ps(s, _mm_movehl_ps(s, s));
    s = _mm_add_ss(s, _mm_shuffle_ps(s, s, 0x55));
    return _mm_cvtss_f32(s);
  }
};

template <>
struct Vec<double> {
  using R = __m256d;
  static constexpr int kLanes = 4;
  static R zero() { return _mm256_setzero_pd(); }
  static R set1(double v) { return _mm256_set1_pd(v); }
  static R load(const double* p) { return _mm256_loadu_pd(p); }
  static void store(double* p, R v) { _mm256_storeu_pd(p, v); }
  static R fmadd(R a, R b, R c) { return _mm256_fmadd_pd(a, b, c); }
  static R add(R a, R b) { return _mm256_add_pd(a, b); }
  static R mul(R a, R b) { return _mm256_mul_pd(a, b); }
  static R max(R a, R b) { return _mm256_max_pd(a, b); }
  static R select_positive(R x, R gy) {
    return _mm256_and_pd(_mm256_cmp_pd(x, _mm256_setzero_pd(), _CMP_GT_OQ), gy);
  }
  static double hsum(R v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
  }
};

inline int min_int(int a, int b) { return a < b ? a : b; }

// Register-blocked update of an MR x (NV*lanes) tile of C. A element (i,p)
// is read as a[i*lda + p] or, transposed, a[p*lda + i].
template <class T, bool kTransA, int MR, int NV>
inline void tile(int k, const T* a, int lda, const T* b, int ldb, T* c, int ldc, bool accumulate) {
  using V = Vec<T>;
  constexpr int L = V::kLanes;
  typename V::R acc[MR][NV];
  for (int r = 0; r < MR; ++r)
    for (int v = 0; v < NV; ++v)
      acc[r][v] = accumulate ? V::load(c + static_cast<long>(r) * ldc + v * L) : V::zero();
  for (int p = 0; p < k; ++p) {
    const T* brow = b + static_cast<long>(p) * ldb;
    typename V::R bv[NV];
    for (int v = 0; v < NV; ++v) bv[v] = V::load(brow + v * L);
    for (int r = 0; r < MR; ++r) {
      const T av = kTransA ? a[static_cast<long>(p) * lda + r] : a[static_cast<long>(r) * lda + p];
      const typename V::R ab = V::set1(av);
      for (int v = 0; v < NV; ++v) acc[r][v] = V::fmadd(ab, bv[v], acc[r][v]);
    }
  }
  for (int r = 0; r < MR; ++r)
    for (int v = 0; v < NV; ++v) V::store(c + static_cast<long>(r) * ldc + v * L, acc[r][v]);
}

template <class T, bool kTransA, int NV>
inline void tile_rows(int mr, int k, const T* a, int lda, const T* b, int ldb, T* c, int ldc,
                      bool accumulate) {
  switch (mr) {
    case 4: tile<T, kTransA, 4, NV>(k, a, lda, b, ldb, c, ldc, accumulate); break;
    case 3: tile<T, kTransA, 3, NV>(k, a, lda, b, ldb, c, ldc, accumulate); break;
    case 2: tile<T, kTransA, 2, NV>(k, a, lda, b, ldb, c, ldc, accumulate); break;
    default: tile<T, kTransA, 1, NV>(k, a, lda, b, ldb, c, ldc, accumulate); break;
  }
}

template <class T, bool kTransA>
void gemm_generic(int m, int n, int k, const T* a, int lda, const T* b, int ldb, T* c, int ldc,
                  bool accumulate) {
  constexpr int L = Vec<T>::kLanes;
  constexpr int kPanel = 2 * L;
  // Column panels outermost so the K x panel slice of B stays in L1 while
  // every row block of A streams over it.
  int j = 0;
  for (; j + kPanel <= n; j += kPanel) {
    for (int i = 0; i < m; i += 4) {
      const int mr = min_int(4, m - i);
      const T* ai = kTransA ? a + i : a + static_cast<long>(i) * lda;
      tile_rows<T, kTransA, 2>(mr, k, ai, lda, b + j, ldb, c + static_cast<long>(i) * ldc + j, ldc,
                               accumulate);
    }
  }
  for (; j + L <= n; j += L) {
    for (int i = 0; i < m; i += 4) {
      const int mr = min_int(4, m - i);
      const T* ai = kTransA ? a + i : a + static_cast<long>(i) * lda;
      tile_rows<T, kTransA, 1>(mr, k, ai, lda, b + j, ldb, c + static_cast<long>(i) * ldc + j, ldc,
                               accumulate);
    }
  }
  for (; j < n; ++j) {
    for (int i = 0; i < m; ++i) {
      T s = accumulate ? c[static_cast<long>(i) * ldc + j] : T(0);
      for (int p = 0; p < k; ++p) {
        const T av = kTransA ? a[static_cast<long>(p) * lda + i] : a[static_cast<long>(i) * lda + p];
        s += av * b[static_cast<long>(p) * ldb + j];
      }
      c[static_cast<long>(i) * ldc + j] = s;
    }
  }
}

}  // namespace

template <class T>
void gemm_nn(int m, int n, int k, const T* a, int lda, const T* b, int ldb, T* c, int ldc,
             bool accumulate) {
  gemm_generic<T, false>(m, n, k, a, lda, b, ldb, c, ldc, accumulate);
}

template <class T>
void gemm_tn(int m, int n, int k, const T* a, int lda, const T* b, int ldb, T* c, int ldc,
             bool accumulate) {
  gemm_generic<T, true>(m, n, k, a, lda, b, ldb, c, ldc, accumulate);
}

template <class T>
void gemm_nt(int m, int n, int k, const T* a, int lda, const T* b, int ldb, T* c, int ldc,
             bool accumulate) {
  using V = Vec<T>;
  using R = typename V::R;
  constexpr int L = V::kLanes;
  const int kv = k - k % L;
  auto store = [&](int i, int j, T r) {
    T& out = c[static_cast<long>(i) * ldc + j];
    out = accumulate ? out + r : r;
  };
  int i = 0;
  // 4x2 blocks: each B row is streamed once per four rows of A.
  for (; i + 4 <= m; i += 4) {
    const T* a0 = a + static_cast<long>(i) * lda;
    const T* a1 = a0 + lda;
    const T* a2 = a1 + lda;
    const T* a3 = a2 + lda;
    int j = 0;
    for (; j + 2 <= n; j += 2) {
      const T* b0 = b + static_cast<long>(j) * ldb;
      const T* b1 = b0 + ldb;
      R s00 = V::zero(), s01 = V::zero(), s10 = V::zero(), s11 = V::zero();
      R s20 = V::zero(), s21 = V::zero(), s30 = V::zero(), s31 = V::zero();
      for (int p = 0; p < kv; p += L) {
        const R v0 = V::load(b0 + p);
        const R v1 = V::load(b1 + p);
        R av = V::load(a0 + p);
        s00 = V::fmadd(av, v0, s00);
        s01 = V::fmadd(av, v1, s01);
        av = V::load(a1 + p);
        s10 = V::fmadd(av, v0, s10);
        s11 = V::fmadd(av, v1, s11);
        av = V::load(a2 + p);
        s20 = V::fmadd(av, v0, s20);
        s21 = V::fmadd(av, v1, s21);
        av = V::load(a3 + p);
        s30 = V::fmadd(av, v0, s30);
        s31 = V::fmadd(av, v1, s31);
      }
      T r[8] = {V::hsum(s00), V::hsum(s01), V::hsum(s10), V::hsum(s11),
                V::hsum(s20), V::hsum(s21), V::hsum(s30), V::hsum(s31)};
      const T* rows[4] = {a0, a1, a2, a3};
      for (int q = 0; q < 4; ++q)
        for (int p = kv; p < k; ++p) {
          r[2 * q] += rows[q][p] * b0[p];
          r[2 * q + 1] += rows[q][p] * b1[p];
        }
      for (int q = 0; q < 4; ++q) {
        store(i + q, j, r[2 * q]);
        store(i + q, j + 1, r[2 * q + 1]);
      }
    }
    for (; j < n; ++j) {
      const T* bj = b + static_cast<long>(j) * ldb;
      const T* rows[4] = {a0, a1, a2, a3};
      for (int q = 0; q < 4; ++q) {
        R acc = V::zero();
        for (int p = 0; p < kv; p += L) acc = V::fmadd(V::load(rows[q] + p), V::load(bj + p), acc);
        T r = V::hsum(acc);
        for (int p = kv; p < k; ++p) r += rows[q][p] * bj[p];
        store(i + q, j, r);
      }
    }
  }
  for (; i < m; ++i) {
    const T* arow = a + static_cast<long>(i) * lda;
    for (int j = 0; j < n; ++j) {
      const T* bj = b + static_cast<long>(j) * ldb;
      R acc = V::zero();
      for (int p = 0; p < kv; p += L) acc = V::fmadd(V::load(arow + p), V::load(bj + p), acc);
      T r = V::hsum(acc);
      for (int p = kv; p < k; ++p) r += arow[p] * bj[p];
      store(i, j, r);
    }
  }
}

template <class T>
void axpy(std::size_t n, T alpha, const T* x, T* y) {
  using V = Vec<T>;
  constexpr std::size_t L = V::kLanes;
  const typename V::R av = V::set1(alpha);
  std::size_t i = 0;
  for (; i + L <= n; i += L) V::store(y + i, V::fmadd(av, V::load(x + i), V::load(y + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

template <class T>
void mul(std::size_t n, const T* a, const T* b, T* out) {
  using V = Vec<T>;
  constexpr std::size_t L = V::kLanes;
  std::size_t i = 0;
  for (; i + L <= n; i += L) V::store(out + i, V::mul(V::load(a + i), V::load(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

template <class T>
void add(std::size_t n, const T* a, const T* b, T* out) {
  using V = Vec<T>;
  constexpr std::size_t L = V::kLanes;
  std::size_t i = 0;
  for (; i + L <= n; i += L) V::store(out + i, V::add(V::load(a + i), V::load(b + i)));
  for (; i < n; ++i) out[i] = a[i] + b[i];
}

template <class T>
void relu_forward(std::size_t n, const T* x, T* y) {
  using V = Vec<T>;
  constexpr std::size_t L = V::kLanes;
  std::size_t i = 0;
  for (; i + L <= n; i += L) V::store(y + i, V::max(V::load(x + i), V::zero()));
  for (; i < n; ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
}

template <class T>
void relu_backward(std::size_t n, const T* x, const T* gy, T* gx) {
  using V = Vec<T>;
  constexpr std::size_t L = V::kLanes;
  std::size_t i = 0;
  for (; i + L <= n; i += L)
    V::store(gx + i, V::add(V::load(gx + i), V::select_positive(V::load(x + i), V::load(gy + i))));
  for (; i < n; ++i)
    if (x[i] > T(0)) gx[i] += gy[i];
}

template <class T>
T sum(std::size_t n, const T* x) {
  using V = Vec<T>;
  constexpr std::size_t L = V::kLanes;
  typename V::R acc = V::zero();
  std::size_t i = 0;
  for (; i + L <= n; i += L) acc = V::add(acc, V::load(x + i));
  T s = V::hsum(acc);
  for (; i < n; ++i) s += x[i];
  return s;
}

#else  // !CDG_HAVE_AVX2

// Never dispatched to: active_isa() cannot select AVX2 when compiled() is
// false. The definitions only satisfy the linker.
template <class T>
void gemm_nn(int, int, int, const T*, int, const T*, int, T*, int, bool) {}
template <class T>
void gemm_tn(int, int, int, const T*, int, const T*, int, T*, int, bool) {}
template <class T>
void gemm_nt(int, int, int, const T*, int, const T*, int, T*, int, bool) {}
template <class T>
void axpy(std::size_t, T, const T*, T*) {}
template <class T>
void mul(std::size_t, const T*, const T*, T*) {}
template <class T>
void add(std::size_t, const T*, const T*, T*) {}
template <class T>
void relu_forward(std::size_t, const T*, T*) {}
template <class T>
void relu_backward(std::size_t, const T*, const T*, T*) {}
template <class T>
T sum(std::size_t, const T*) {
  return T(0);
}

#endif

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

}  // namespace cdg::kernels::avx2
