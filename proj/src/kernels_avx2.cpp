// Compiled with -mavx2 (no -mfma) only when the target is x86-64; the
// dispatcher calls into it after checking CPU support.

#include "dynalay/kernels.hpp"

#include <immintrin.h>

#include <cstdint>

namespace dynalay::kernels {
namespace {

// Four rows per pass, one lane per row: each lane walks its row in the same
// column order as the scalar loop.
void matvec_avx2(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
    const auto stride = static_cast<std::int64_t>(cols);
    const __m256i offsets = _mm256_set_epi64x(3 * stride, 2 * stride, stride, 0);
    std::size_t r = 0;
    for (; r + 4 <= rows; r += 4) {
        const double* block = a + r * cols;
        __m256d acc = _mm256_setzero_pd();
        for (std::size_t c = 0; c < cols; ++c) {
            const __m256d column = _mm256_i64gather_pd(block + c, offsets, 8);
            acc = _mm256_add_pd(acc, _mm256_mul_pd(column, _mm256_set1_pd(x[c])));
        }
        _mm256_storeu_pd(y + r, acc);
    }
    for (; r < rows; ++r) {
        const double* row = a + r * cols;
        double acc = 0.0;
        for (std::size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
        y[r] = acc;
    }
}

void matvec_transposed_avx2(const double* a, std::size_t rows, std::size_t cols, const double* u,
                            double* y) {
    for (std::size_t c = 0; c < cols; ++c) y[c] = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
        const double* row = a + r * cols;
        const __m256d ur = _mm256_set1_pd(u[r]);
        std::size_t c = 0;
        for (; c + 4 <= cols; c += 4) {
            const __m256d prod = _mm256_mul_pd(_mm256_loadu_pd(row + c), ur);
            _mm256_storeu_pd(y + c, _mm256_add_pd(_mm256_loadu_pd(y + c), prod));
        }
        for (; c < cols; ++c) y[c] += row[c] * u[r];
    }
}

void add_outer_avx2(double* g, std::size_t rows, std::size_t cols, const double* s, const double* z) {
    for (std::size_t r = 0; r < rows; ++r) {
        double* row = g + r * cols;
        const __m256d sr = _mm256_set1_pd(s[r]);
        std::size_t c = 0;
        for (; c + 4 <= cols; c += 4) {
            const __m256d prod = _mm256_mul_pd(sr, _mm256_loadu_pd(z + c));
            _mm256_storeu_pd(row + c, _mm256_add_pd(_mm256_loadu_pd(row + c), prod));
        }
        for (; c < cols; ++c) row[c] += s[r] * z[c];
    }
}

void axpy_avx2(std::size_t n, double alpha, const double* x, double* y) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
        _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

constexpr KernelTable kAvx2{matvec_avx2, matvec_transposed_avx2, add_outer_avx2, axpy_avx2};

} // namespace

const KernelTable& avx2_table_impl() noexcept { return kAvx2; }

} // namespace dynalay::kernels
