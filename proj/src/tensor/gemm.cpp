#include "gemm.hpp"

#include <cmath>
#include <vector>

#if defined(__AVX512F__)
#include <immintrin.h>
#endif

namespace drd::detail {

namespace {

// Fused when the target has FMA so edge tiles round like the vector kernel.
inline float madd(float a, float b, float c) {
#if defined(__FMA__)
  return std::fma(a, b, c);
#else
  return a * b + c;
#endif
}

constexpr std::int64_t kRows = 8;
constexpr std::int64_t kCols = 32;

// A(i, p) accessor for the two storage orders.
struct RowMajorA {
  const float* a;
  std::int64_t lda;
  float operator()(std::int64_t i, std::int64_t p) const { return a[i * lda + p]; }
};

struct TransposedA {
  const float* a;
  std::int64_t lda;
  float operator()(std::int64_t i, std::int64_t p) const { return a[p * lda + i]; }
};

// B[:, j0:j0+kCols] copied into a contiguous k x kCols panel.
void pack_panel(const float* b, std::int64_t ldb, std::int64_t j0, std::int64_t k, float* panel) {
  for (std::int64_t p = 0; p < k; ++p) {
    const float* src = b + p * ldb + j0;
    for (std::int64_t l = 0; l < kCols; ++l) panel[p * kCols + l] = src[l];
  }
}

template <class A>
void tile_full(const A& a, std::int64_t i0, std::int64_t j0, std::int64_t k, const float* panel, float* c,
               std::int64_t ldc) {
#if defined(__AVX512F__)
  static_assert(kRows == 8 && kCols == 32);
  float* c0 = c + i0 * ldc + j0;
#define DRD_LOAD(r) \
  __m512 a##r##0 = _mm512_loadu_ps(c0 + (r) * ldc), a##r##1 = _mm512_loadu_ps(c0 + (r) * ldc + 16)
  DRD_LOAD(0); DRD_LOAD(1); DRD_LOAD(2); DRD_LOAD(3);
  DRD_LOAD(4); DRD_LOAD(5); DRD_LOAD(6); DRD_LOAD(7);
#undef DRD_LOAD
  for (std::int64_t p = 0; p < k; ++p) {
    const __m512 b0 = _mm512_loadu_ps(panel + p * kCols);
    const __m512 b1 = _mm512_loadu_ps(panel + p * kCols + 16);
#define DRD_FMA(r)                                  \
  {                                                 \
    const __m512 av = _mm512_set1_ps(a(i0 + (r), p)); \
    a##r##0 = _mm512_fmadd_ps(av, b0, a##r##0);     \
    a##r##1 = _mm512_fmadd_ps(av, b1, a##r##1);     \
  }
    DRD_FMA(0) DRD_FMA(1) DRD_FMA(2) DRD_FMA(3)
    DRD_FMA(4) DRD_FMA(5) DRD_FMA(6) DRD_FMA(7)
#undef DRD_FMA
  }
#define DRD_STORE(r) \
  _mm512_storeu_ps(c0 + (r) * ldc, a##r##0); _mm512_storeu_ps(c0 + (r) * ldc + 16, a##r##1)
  DRD_STORE(0); DRD_STORE(1); DRD_STORE(2); DRD_STORE(3);
  DRD_STORE(4); DRD_STORE(5); DRD_STORE(6); DRD_STORE(7);
#undef DRD_STORE
#else
  float acc[kRows][kCols];
  for (std::int64_t r = 0; r < kRows; ++r)
    for (std::int64_t l = 0; l < kCols; ++l) acc[r][l] = c[(i0 + r) * ldc + j0 + l];
  for (std::int64_t p = 0; p < k; ++p) {
    const float* brow = panel + p * kCols;
    for (std::int64_t r = 0; r < kRows; ++r) {
      const float av = a(i0 + r, p);
      for (std::int64_t l = 0; l < kCols; ++l) acc[r][l] = madd(av, brow[l], acc[r][l]);
    }
  }
  for (std::int64_t r = 0; r < kRows; ++r)
    for (std::int64_t l = 0; l < kCols; ++l) c[(i0 + r) * ldc + j0 + l] = acc[r][l];
#endif
}

// Ragged edges: `rows` x `cols` with the same summation order.
template <class A>
void tile_edge(const A& a, std::int64_t i0, std::int64_t rows, std::int64_t j0, std::int64_t cols,
               std::int64_t k, const float* b, std::int64_t ldb, float* c, std::int64_t ldc) {
  for (std::int64_t r = 0; r < rows; ++r) {
    float* crow = c + (i0 + r) * ldc + j0;
    for (std::int64_t p = 0; p < k; ++p) {
      const float av = a(i0 + r, p);
      const float* brow = b + p * ldb + j0;
      for (std::int64_t l = 0; l < cols; ++l) crow[l] = madd(av, brow[l], crow[l]);
    }
  }
}

template <class A>
void gemm(std::int64_t m, std::int64_t n, std::int64_t k, const A& a, const float* b,
          std::int64_t ldb, float* c, std::int64_t ldc) {
  const std::int64_t m_full = m - m % kRows;
  const std::int64_t n_full = n - n % kCols;
  std::vector<float> panel(static_cast<std::size_t>(k * kCols));
  for (std::int64_t j0 = 0; j0 < n_full; j0 += kCols) {
    pack_panel(b, ldb, j0, k, panel.data());
    for (std::int64_t i0 = 0; i0 < m_full; i0 += kRows) tile_full(a, i0, j0, k, panel.data(), c, ldc);
    if (m_full < m) tile_edge(a, m_full, m - m_full, j0, kCols, k, b, ldb, c, ldc);
  }
  if (n_full < n) tile_edge(a, 0, m, n_full, n - n_full, k, b, ldb, c, ldc);
}

constexpr std::int64_t kLanes = 16;

// Dot product of two length-k rows as 16 strided partial sums, reduced pairwise.
float dot_lanes(const float* x, const float* y, std::int64_t k) {
  float part[kLanes] = {};
  const std::int64_t k_full = k - k % kLanes;
  for (std::int64_t p = 0; p < k_full; p += kLanes)
    for (std::int64_t l = 0; l < kLanes; ++l) part[l] = madd(x[p + l], y[p + l], part[l]);
  for (std::int64_t p = k_full; p < k; ++p) part[p - k_full] = madd(x[p], y[p], part[p - k_full]);
  for (std::int64_t width = kLanes / 2; width > 0; width /= 2)
    for (std::int64_t l = 0; l < width; ++l) part[l] += part[l + width];
  return part[0];
}

#if defined(__AVX512F__)
// Same lane layout as dot_lanes, four rows of A against four rows of B.
inline float reduce_lanes(__m512 v) {
  alignas(64) float part[kLanes];
  _mm512_store_ps(part, v);
  for (std::int64_t width = kLanes / 2; width > 0; width /= 2)
    for (std::int64_t l = 0; l < width; ++l) part[l] += part[l + width];
  return part[0];
}

void dot_tile(const float* a, std::int64_t lda, const float* b, std::int64_t ldb, std::int64_t k, float* c,
              std::int64_t ldc) {
  __m512 acc[4][4];
  for (auto& row : acc)
    for (auto& v : row) v = _mm512_setzero_ps();
  const std::int64_t k_full = k - k % kLanes;
  for (std::int64_t p = 0; p < k_full; p += kLanes) {
    const __m512 b0 = _mm512_loadu_ps(b + p), b1 = _mm512_loadu_ps(b + ldb + p);
    const __m512 b2 = _mm512_loadu_ps(b + 2 * ldb + p), b3 = _mm512_loadu_ps(b + 3 * ldb + p);
    for (int r = 0; r < 4; ++r) {
      const __m512 av = _mm512_loadu_ps(a + r * lda + p);
      acc[r][0] = _mm512_fmadd_ps(av, b0, acc[r][0]);
      acc[r][1] = _mm512_fmadd_ps(av, b1, acc[r][1]);
      acc[r][2] = _mm512_fmadd_ps(av, b2, acc[r][2]);
      acc[r][3] = _mm512_fmadd_ps(av, b3, acc[r][3]);
    }
  }
  if (k_full < k) {
    const auto mask = static_cast<__mmask16>((1u << (k - k_full)) - 1u);
    const __m512 b0 = _mm512_maskz_loadu_ps(mask, b + k_full), b1 = _mm512_maskz_loadu_ps(mask, b + ldb + k_full);
    const __m512 b2 = _mm512_maskz_loadu_ps(mask, b + 2 * ldb + k_full);
    const __m512 b3 = _mm512_maskz_loadu_ps(mask, b + 3 * ldb + k_full);
    for (int r = 0; r < 4; ++r) {
      const __m512 av = _mm512_maskz_loadu_ps(mask, a + r * lda + k_full);
      acc[r][0] = _mm512_mask3_fmadd_ps(av, b0, acc[r][0], mask);
      acc[r][1] = _mm512_mask3_fmadd_ps(av, b1, acc[r][1], mask);
      acc[r][2] = _mm512_mask3_fmadd_ps(av, b2, acc[r][2], mask);
      acc[r][3] = _mm512_mask3_fmadd_ps(av, b3, acc[r][3], mask);
    }
  }
  for (int r = 0; r < 4; ++r)
    for (int j = 0; j < 4; ++j) c[r * ldc + j] += reduce_lanes(acc[r][j]);
}
#endif

}  // namespace

void gemm_nt(std::int64_t m, std::int64_t n, std::int64_t k, const float* a, std::int64_t lda,
             const float* b, std::int64_t ldb, float* c, std::int64_t ldc) {
  std::int64_t m_tiled = 0, n_tiled = 0;
#if defined(__AVX512F__)
  m_tiled = m - m % 4;
  n_tiled = n - n % 4;
  for (std::int64_t i = 0; i < m_tiled; i += 4)
    for (std::int64_t j = 0; j < n_tiled; j += 4) dot_tile(a + i * lda, lda, b + j * ldb, ldb, k, c + i * ldc + j, ldc);
#endif
  for (std::int64_t i = 0; i < m; ++i)
    for (std::int64_t j = (i < m_tiled ? n_tiled : 0); j < n; ++j)
      c[i * ldc + j] += dot_lanes(a + i * lda, b + j * ldb, k);
}

void gemm_nn(std::int64_t m, std::int64_t n, std::int64_t k, const float* a, std::int64_t lda,
             const float* b, std::int64_t ldb, float* c, std::int64_t ldc) {
  gemm(m, n, k, RowMajorA{a, lda}, b, ldb, c, ldc);
}

void gemm_tn(std::int64_t m, std::int64_t n, std::int64_t k, const float* a, std::int64_t lda,
             const float* b, std::int64_t ldb, float* c, std::int64_t ldc) {
  gemm(m, n, k, TransposedA{a, lda}, b, ldb, c, ldc);
}

}  // namespace drd::detail
