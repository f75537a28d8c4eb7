#pragma once

#include <cstdint>

namespace drd::detail {

// Row-major single-precision products that accumulate into C. Each output
// element sums over the inner dimension in ascending order, so results are
// independent of tiling and of the thread count.

// C[m x n] += A[m x k] * B[k x n]
void gemm_nn(std::int64_t m, std::int64_t n, std::int64_t k, const float* a, std::int64_t lda,
             const float* b, std::int64_t ldb, float* c, std::int64_t ldc);

// C[m x n] += A^T * B where A is stored k x m.
void gemm_tn(std::int64_t m, std::int64_t n, std::int64_t k, const float* a, std::int64_t lda,
             const float* b, std::int64_t ldb, float* c, std::int64_t ldc);

// C[m x n] += A * B^T where B is stored n x k. The inner sum is split into
// 16 interleaved partial sums combined in a fixed order, so it is
// deterministic but not bit-identical to gemm_nn on the same data.
void gemm_nt(std::int64_t m, std::int64_t n, std::int64_t k, const float* a, std::int64_t lda,
             const float* b, std::int64_t ldb, float* c, std::int64_t ldc);

}  // namespace drd::detail
