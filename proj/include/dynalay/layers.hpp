#pragma once

#include <cstdint>

#include "dynalay/linalg.hpp"

namespace dynalay {

inline constexpr double kDefaultContractionTarget = 0.9;
/// Power iterations and seed used for every contraction certificate.
inline constexpr int kCertifyPowerIters = 300;
inline constexpr std::uint64_t kCertifySeed = 0x5eed'ce27ULL;
/// Bounds this close above the target count as certified; keeps
/// enforce_contraction idempotent under estimation round-off.
inline constexpr double kCertificationSlack = 1e-9;

/// f(z, x) = φ(w_z·z + w_x·x + b) with a d×d state map.
///
/// Immutable: the certified bound σ̂(w_z)·sup|φ′| is computed when the layer is
/// constructed, so it always describes the weights it is stored with.
class FpiLayer {
public:
    FpiLayer(DenseMatrix w_z, DenseMatrix w_x, Vector b, Activation act = Activation::Tanh,
             double contraction_target = kDefaultContractionTarget);

    const DenseMatrix& w_z() const noexcept { return w_z_; }
    const DenseMatrix& w_x() const noexcept { return w_x_; }
    const Vector& b() const noexcept { return b_; }
    Activation activation() const noexcept { return act_; }
    double contraction_target() const noexcept { return target_; }
    std::size_t state_dim() const noexcept { return w_z_.rows(); }
    std::size_t input_dim() const noexcept { return w_x_.cols(); }

    /// σ̂(w_z)·sup|φ′|
    double certified_bound() const noexcept { return bound_; }
    bool is_certified() const noexcept { return bound_ <= target_ + kCertificationSlack && bound_ < 1.0; }

    /// Same activation and target, new parameters.
    FpiLayer with_params(DenseMatrix w_z, DenseMatrix w_x, Vector b) const;

    friend bool operator==(const FpiLayer&, const FpiLayer&) = default;

private:
    DenseMatrix w_z_;
    DenseMatrix w_x_;
    Vector b_;
    Activation act_;
    double target_;
    double bound_;
};

/// y = φ(w·x + b)
struct DenseLayer {
    DenseMatrix w;
    Vector b;
    Activation act = Activation::Identity;

    std::size_t input_dim() const noexcept { return w.cols(); }
    std::size_t output_dim() const noexcept { return w.rows(); }
    friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

struct FpiLayerVjp {
    Vector u_z;
    Vector u_x;
    DenseMatrix grad_wz;
    DenseMatrix grad_wx;
    Vector grad_b;
};

/// Parameter gradients of one dense layer.
struct DenseGrad {
    DenseMatrix w;
    Vector b;

    static DenseGrad zeros_like(const DenseLayer& layer);
    void add(const DenseGrad& other);
};

struct DenseLayerVjp {
    Vector u_x;
    DenseMatrix grad_w;
    Vector grad_b;
};

Vector fpi_layer_forward(const FpiLayer& layer, std::span<const double> z, std::span<const double> x);
/// Pre-activation w_z·z + w_x·x + b.
Vector fpi_layer_preactivation(const FpiLayer& layer, std::span<const double> z, std::span<const double> x);

/// Rescales w_z so the certified bound is at most the layer's target. Returns
/// the layer unchanged when it is already certified.
FpiLayer enforce_contraction(const FpiLayer& layer);
double lipschitz_bound(const FpiLayer& layer);

/// Vector-Jacobian products of u ↦ uᵀ f(z, x) for every argument.
FpiLayerVjp fpi_layer_vjp(const FpiLayer& layer, std::span<const double> z, std::span<const double> x,
                          std::span<const double> u);

/// Random layer: Gaussian weights with std `scale`/sqrt(fan_in), certified.
FpiLayer random_fpi_layer(std::size_t d, std::size_t m, std::uint64_t seed, Activation act = Activation::Tanh,
                          double contraction_target = kDefaultContractionTarget, double scale = 1.0);

Vector dense_forward(const DenseLayer& layer, std::span<const double> x);
Vector dense_preactivation(const DenseLayer& layer, std::span<const double> x);
DenseLayerVjp dense_vjp(const DenseLayer& layer, std::span<const double> x, std::span<const double> u);

DenseLayer random_dense_layer(std::size_t in, std::size_t out, Activation act, std::uint64_t seed,
                              double scale = 1.0);
DenseLayer zero_dense_layer(std::size_t in, std::size_t out, Activation act);

} // namespace dynalay
