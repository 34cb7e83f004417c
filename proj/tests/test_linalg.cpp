#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <random>
#include <string>

#include "dynalay/error.hpp"
#include "dynalay/kernels.hpp"
#include "dynalay/linalg.hpp"
#include "oracles.hpp"

using namespace dynalay;

namespace {

DenseMatrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& gen, double sd = 1.0) {
    std::normal_distribution<double> nd(0.0, sd);
    DenseMatrix m(r, c);
    for (double& v : m.data()) v = nd(gen);
    return m;
}

Vector random_vector(std::size_t n, std::mt19937_64& gen) {
    std::normal_distribution<double> nd;
    Vector v(n);
    for (double& x : v) x = nd(gen);
    return v;
}

} // namespace

TEST_CASE("the backend honours DYNALAY_KERNELS") {
    const char* env = std::getenv("DYNALAY_KERNELS");
    if (env && std::string(env) == "scalar") {
        CHECK(kernels::active_backend() == kernels::Backend::Scalar);
    } else {
        CHECK(kernels::active_backend() ==
              (kernels::avx2_available() ? kernels::Backend::Avx2 : kernels::Backend::Scalar));
    }
    MESSAGE("kernel backend: " << kernels::backend_name(kernels::active_backend()));
}

TEST_CASE("DenseMatrix validates shape and contents") {
    CHECK_THROWS_AS(DenseMatrix(0, 3), InputError);
    CHECK_THROWS_AS(DenseMatrix(2, 2, {1, 2, 3}), InputError);
    CHECK_THROWS_AS(DenseMatrix(1, 2, {1, NAN}), InputError);
    CHECK_THROWS_AS(DenseMatrix(1, 1, {INFINITY}), InputError);
    const DenseMatrix m(2, 3, {1, 2, 3, 4, 5, 6});
    CHECK(m(1, 0) == 4);
    CHECK(m.transposed()(2, 1) == 6);
    CHECK(m.scaled(2.0)(0, 2) == 6);
    CHECK(DenseMatrix::identity(3)(1, 1) == 1);
    CHECK(DenseMatrix::identity(3)(1, 2) == 0);
}

TEST_CASE("matvec on small hand-checked cases") {
    CHECK(matvec(DenseMatrix::identity(2), Vector{3, -1}) == Vector{3, -1});
    CHECK(matvec(DenseMatrix(2, 2, {1, 2, 3, 4}), Vector{1, 1}) == Vector{3, 7});
    CHECK_THROWS_AS(matvec(DenseMatrix::identity(2), Vector{1, 2, 3}), InputError);
    CHECK_THROWS_AS(matvec_transposed(DenseMatrix::identity(2), Vector{1}), InputError);
}

TEST_CASE("matvec and its transpose agree exactly with naive loops") {
    std::mt19937_64 gen(1);
    for (std::size_t r : {1u, 3u, 5u, 8u, 13u})
        for (std::size_t c : {1u, 2u, 5u, 9u, 16u}) {
            const DenseMatrix a = random_matrix(r, c, gen);
            const Vector x = random_vector(c, gen), u = random_vector(r, gen);
            CHECK(matvec(a, x) == oracle::naive_matvec(a, x));
            CHECK(matvec_transposed(a, u) == oracle::naive_matvec_t(a, u));
        }
}

TEST_CASE("add_outer and axpy") {
    DenseMatrix g(2, 3);
    add_outer(g, Vector{1, 2}, Vector{3, 4, 5});
    CHECK(g == DenseMatrix(2, 3, {3, 4, 5, 6, 8, 10}));
    Vector y{1, 1, 1};
    axpy(2.0, Vector{1, 2, 3}, y);
    CHECK(y == Vector{3, 5, 7});
    CHECK_THROWS_AS(axpy(1.0, Vector{1}, y), InputError);
    CHECK(dot(Vector{1, 2}, Vector{3, 4}) == 11);
    CHECK(norm2(Vector{3, 4}) == doctest::Approx(5.0));
    CHECK(distance(Vector{1, 1}, Vector{4, 5}) == doctest::Approx(5.0));
    CHECK_FALSE(all_finite(Vector{1, NAN}));
}

TEST_CASE("property: matvec distributes over addition") {
    std::mt19937_64 gen(2);
    for (int t = 0; t < 50; ++t) {
        const DenseMatrix a = random_matrix(7, 6, gen);
        const Vector x = random_vector(6, gen), y = random_vector(6, gen);
        Vector xy(6);
        for (int i = 0; i < 6; ++i) xy[i] = x[i] + y[i];
        Vector sum = matvec(a, x);
        axpy(1.0, matvec(a, y), sum);
        CHECK(oracle::rel_err(matvec(a, xy), sum) <= 1e-12);
    }
}

TEST_CASE("spectral norm on known matrices") {
    CHECK(spectral_norm_estimate(DenseMatrix::identity(3), 300, 1) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(spectral_norm_estimate(DenseMatrix::diagonal(Vector{2, 1, 0.5}), 300, 1) ==
          doctest::Approx(2.0).epsilon(1e-9));
    CHECK(spectral_norm_estimate(DenseMatrix(3, 3), 300, 1) == 0.0);
    CHECK_THROWS_AS(spectral_norm_estimate(DenseMatrix::identity(2), 0, 1), InputError);
}

TEST_CASE("spectral norm agrees with a Jacobi SVD oracle") {
    std::mt19937_64 gen(3);
    for (int t = 0; t < 20; ++t) {
        const DenseMatrix a = random_matrix(4, 4, gen);
        const double want = oracle::spectral_norm(a);
        CHECK(std::abs(spectral_norm_estimate(a, 200, 9) - want) <= 1e-6 * want);
    }
}

TEST_CASE("property: spectral norm is absolutely homogeneous and seeded") {
    std::mt19937_64 gen(4);
    for (int t = 0; t < 20; ++t) {
        const DenseMatrix a = random_matrix(5, 3, gen);
        const double s = spectral_norm_estimate(a, 300, 11);
        for (double c : {-3.0, 0.25, 7.5})
            CHECK(spectral_norm_estimate(a.scaled(c), 300, 11) == doctest::Approx(std::abs(c) * s).epsilon(1e-6));
        CHECK(spectral_norm_estimate(a, 300, 11) == s);
    }
}

TEST_CASE("activations and derivatives") {
    CHECK(apply_activation(Activation::Tanh, Vector{0}) == Vector{0});
    CHECK(activation_derivative(Activation::Tanh, Vector{0}) == Vector{1});
    CHECK(apply_activation(Activation::ReLU, Vector{-2, 3}) == Vector{0, 3});
    CHECK(activation_derivative(Activation::ReLU, Vector{-2, 3}) == Vector{0, 1});
    CHECK(activation_derivative(Activation::ReLU, Vector{0}) == Vector{0});
    CHECK(activation_derivative(Activation::Identity, Vector{-5}) == Vector{1});

    const double h = 1e-5;
    const double fd = (std::tanh(1 + h) - std::tanh(1 - h)) / (2 * h);
    CHECK(std::abs(activation_derivative(Activation::Tanh, Vector{1})[0] - fd) <= 1e-8);

    CHECK(parse_activation("relu") == Activation::ReLU);
    CHECK(to_string(Activation::Identity) == "identity");
    CHECK_THROWS_AS(parse_activation("gelu"), InputError);
}

TEST_CASE("property: every activation is sup|phi'|-Lipschitz on sampled pairs") {
    std::mt19937_64 gen(5);
    std::normal_distribution<double> nd(0.0, 4.0);
    for (Activation a : {Activation::Tanh, Activation::ReLU, Activation::Identity}) {
        const double lip = activation_lipschitz(a);
        for (int i = 0; i < 2000; ++i) {
            const double u = nd(gen), v = nd(gen);
            const double fu = apply_activation(a, Vector{u})[0], fv = apply_activation(a, Vector{v})[0];
            CHECK(std::abs(fu - fv) <= lip * std::abs(u - v) * (1 + 1e-12));
        }
    }
}
