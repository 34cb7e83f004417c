#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace dynalay {

using Vector = std::vector<double>;

/// Row-major dense matrix of doubles. Shape is fixed at construction.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols);
    /// Throws InputError if data.size() != rows*cols or any entry is non-finite.
    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    static DenseMatrix identity(std::size_t n);
    static DenseMatrix diagonal(std::span<const double> diag);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return data_.empty(); }

    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }
    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }

    std::span<const double> data() const noexcept { return data_; }
    std::span<double> data() noexcept { return data_; }
    std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

    DenseMatrix scaled(double factor) const;
    DenseMatrix transposed() const;

    bool same_shape(const DenseMatrix& other) const noexcept {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }
    friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Vector matvec(const DenseMatrix& a, std::span<const double> x);
/// aᵀ·u without forming the transpose.
Vector matvec_transposed(const DenseMatrix& a, std::span<const double> u);
/// g += s·zᵀ
void add_outer(DenseMatrix& g, std::span<const double> s, std::span<const double> z);
/// y += alpha·x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> v);
/// ‖a − b‖₂
double distance(std::span<const double> a, std::span<const double> b);
bool all_finite(std::span<const double> v) noexcept;

/// Largest singular value by power iteration on aᵀa, started from a seeded
/// Gaussian vector. Returns 0 for the zero matrix.
double spectral_norm_estimate(const DenseMatrix& a, int power_iters, std::uint64_t seed);

enum class Activation { Tanh, ReLU, Identity };

Vector apply_activation(Activation act, std::span<const double> v);
/// φ′ evaluated at the pre-activation v. ReLU uses φ′(0) = 0.
Vector activation_derivative(Activation act, std::span<const double> v);
/// sup|φ′| over the real line.
double activation_lipschitz(Activation act) noexcept;

std::string_view to_string(Activation act) noexcept;
/// Accepts "tanh", "relu", "identity". Throws InputError otherwise.
Activation parse_activation(std::string_view name);

} // namespace dynalay
