#pragma once

// Raw dense kernels behind linalg. Every routine has a scalar reference
// implementation and, on x86-64, an AVX2 variant selected at runtime.
//
// The vector variants keep the scalar summation order per output element
// and never contract into FMA, so both backends are bit-identical. The
// equivalence tests rely on that.

#include <cstddef>
#include <string_view>

namespace dynalay::kernels {

enum class Backend { Scalar, Avx2 };

struct KernelTable {
    // y[r] = sum_c a[r*cols + c] * x[c]
    void (*matvec)(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);
    // y[c] = sum_r a[r*cols + c] * u[r]
    void (*matvec_transposed)(const double* a, std::size_t rows, std::size_t cols, const double* u,
                              double* y);
    // g[r*cols + c] += s[r] * z[c]
    void (*add_outer)(double* g, std::size_t rows, std::size_t cols, const double* s, const double* z);
    // y[i] += alpha * x[i]
    void (*axpy)(std::size_t n, double alpha, const double* x, double* y);
};

const KernelTable& scalar_table() noexcept;
bool avx2_available() noexcept;
/// Throws std::runtime_error when the AVX2 table was not compiled in.
const KernelTable& avx2_table();

/// The table all linalg routines go through. Chosen once at startup: AVX2 when
/// the CPU supports it, unless DYNALAY_KERNELS=scalar is set.
const KernelTable& active() noexcept;
Backend active_backend() noexcept;
/// Override the startup choice. Falls back to scalar if AVX2 is unavailable.
void set_backend(Backend b) noexcept;
std::string_view backend_name(Backend b) noexcept;

} // namespace dynalay::kernels
