#include "dynalay/kernels.hpp"

namespace dynalay::kernels {
namespace {

void matvec_scalar(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double* row = a + r * cols;
        double acc = 0.0;
        for (std::size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
        y[r] = acc;
    }
}

void matvec_transposed_scalar(const double* a, std::size_t rows, std::size_t cols, const double* u,
                              double* y) {
    for (std::size_t c = 0; c < cols; ++c) y[c] = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
        const double* row = a + r * cols;
        const double ur = u[r];
        for (std::size_t c = 0; c < cols; ++c) y[c] += row[c] * ur;
    }
}

void add_outer_scalar(double* g, std::size_t rows, std::size_t cols, const double* s, const double* z) {
    for (std::size_t r = 0; r < rows; ++r) {
        double* row = g + r * cols;
        const double sr = s[r];
        for (std::size_t c = 0; c < cols; ++c) row[c] += sr * z[c];
    }
}

void axpy_scalar(std::size_t n, double alpha, const double* x, double* y) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

constexpr KernelTable kScalar{matvec_scalar, matvec_transposed_scalar, add_outer_scalar, axpy_scalar};

} // namespace

const KernelTable& scalar_table() noexcept { return kScalar; }

} // namespace dynalay::kernels
