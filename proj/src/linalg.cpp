#include "dynalay/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dynalay/error.hpp"
#include "dynalay/kernels.hpp"
#include "dynalay/rng.hpp"

namespace dynalay {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {
    if (rows == 0 || cols == 0) throw InputError("DenseMatrix: rows and cols must be positive");
}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (rows == 0 || cols == 0) throw InputError("DenseMatrix: rows and cols must be positive");
    if (data_.size() != rows * cols)
        throw InputError("DenseMatrix: data length " + std::to_string(data_.size()) + " != " +
                         std::to_string(rows) + "x" + std::to_string(cols));
    if (!all_finite(data_)) throw InputError("DenseMatrix: non-finite entry");
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

DenseMatrix DenseMatrix::diagonal(std::span<const double> diag) {
    DenseMatrix m(diag.size(), diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
    return m;
}

DenseMatrix DenseMatrix::scaled(double factor) const {
    DenseMatrix out = *this;
    for (double& v : out.data_) v *= factor;
    return out;
}

DenseMatrix DenseMatrix::transposed() const {
    DenseMatrix out(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) out(c, r) = (*this)(r, c);
    return out;
}

Vector matvec(const DenseMatrix& a, std::span<const double> x) {
    if (a.cols() != x.size())
        throw InputError("matvec: matrix has " + std::to_string(a.cols()) + " cols, vector has " +
                         std::to_string(x.size()) + " entries");
    Vector y(a.rows());
    kernels::active().matvec(a.data().data(), a.rows(), a.cols(), x.data(), y.data());
    return y;
}

Vector matvec_transposed(const DenseMatrix& a, std::span<const double> u) {
    if (a.rows() != u.size())
        throw InputError("matvec_transposed: matrix has " + std::to_string(a.rows()) + " rows, vector has " +
                         std::to_string(u.size()) + " entries");
    Vector y(a.cols());
    kernels::active().matvec_transposed(a.data().data(), a.rows(), a.cols(), u.data(), y.data());
    return y;
}

void add_outer(DenseMatrix& g, std::span<const double> s, std::span<const double> z) {
    if (g.rows() != s.size() || g.cols() != z.size()) throw InputError("add_outer: shape mismatch");
    kernels::active().add_outer(g.data().data(), g.rows(), g.cols(), s.data(), z.data());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    if (x.size() != y.size()) throw InputError("axpy: length mismatch");
    kernels::active().axpy(x.size(), alpha, x.data(), y.data());
}

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw InputError("dot: length mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

double norm2(std::span<const double> v) { return std::sqrt(dot(v, v)); }

double distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw InputError("distance: length mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

bool all_finite(std::span<const double> v) noexcept {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

double spectral_norm_estimate(const DenseMatrix& a, int power_iters, std::uint64_t seed) {
    if (power_iters < 1) throw InputError("spectral_norm_estimate: power_iters must be >= 1");
    if (std::all_of(a.data().begin(), a.data().end(), [](double x) { return x == 0.0; })) return 0.0;

    Rng rng(seed);
    Vector v(a.cols());
    for (double& x : v) x = rng.normal();
    double n = norm2(v);
    for (double& x : v) x /= n;

    for (int it = 0; it < power_iters; ++it) {
        Vector w = matvec_transposed(a, matvec(a, v));
        n = norm2(w);
        if (n == 0.0) return 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) v[i] = w[i] / n;
    }
    return norm2(matvec(a, v));
}

Vector apply_activation(Activation act, std::span<const double> v) {
    Vector out(v.begin(), v.end());
    switch (act) {
    case Activation::Tanh:
        for (double& x : out) x = std::tanh(x);
        break;
    case Activation::ReLU:
        for (double& x : out) x = x > 0.0 ? x : 0.0;
        break;
    case Activation::Identity:
        break;
    }
    return out;
}

Vector activation_derivative(Activation act, std::span<const double> v) {
    Vector out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        switch (act) {
        case Activation::Tanh: {
            const double t = std::tanh(v[i]);
            out[i] = 1.0 - t * t;
            break;
        }
        case Activation::ReLU:
            out[i] = v[i] > 0.0 ? 1.0 : 0.0;
            break;
        case Activation::Identity:
            out[i] = 1.0;
            break;
        }
    }
    return out;
}

double activation_lipschitz(Activation) noexcept { return 1.0; }

std::string_view to_string(Activation act) noexcept {
    switch (act) {
    case Activation::Tanh: return "tanh";
    case Activation::ReLU: return "relu";
    case Activation::Identity: return "identity";
    }
    return "unknown";
}

Activation parse_activation(std::string_view name) {
    if (name == "tanh") return Activation::Tanh;
    if (name == "relu") return Activation::ReLU;
    if (name == "identity") return Activation::Identity;
    throw InputError("unknown activation '" + std::string(name) + "'");
}

} // namespace dynalay
