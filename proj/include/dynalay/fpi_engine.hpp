#pragma once

#include <functional>

#include "dynalay/layers.hpp"

namespace dynalay {

enum class Z0Policy { Zeros, CopyInput };

struct FpiConfig {
    int max_iter = 50;
    double forward_tol = 1e-2;
    double backward_tol = 1e-5;
    Z0Policy z0_policy = Z0Policy::Zeros;

    /// Throws InputError on non-positive tolerances or max_iter.
    void validate() const;
    friend bool operator==(const FpiConfig&, const FpiConfig&) = default;
};

struct FixedPointResult {
    Vector z_star;
    int iterations = 0;
    /// ‖f(z) − z‖ / ‖f(z)‖ per iteration; the forward stopping criterion.
    std::vector<double> residuals;
    /// ‖f(z) − z‖ per iteration.
    std::vector<double> abs_residuals;
    bool converged = false;
    double cost_units = 0.0;
};

/// Parameter gradients of one fixed-point layer.
struct FpiGrad {
    DenseMatrix wz;
    DenseMatrix wx;
    Vector b;

    static FpiGrad zeros_like(const FpiLayer& layer);
    void add(const FpiGrad& other);
};

struct GradientBundle {
    /// Implicit solve: the adjoint u = g·(I − J_z)⁻¹ at z*.
    /// Unrolled oracle: the gradient with respect to the initial state z0.
    Vector u;
    Vector grad_x;
    FpiGrad params;
    int iterations = 0;
};

/// Iterates z ← f(z, x) until ‖f(z) − z‖/‖f(z)‖ < forward_tol or max_iter.
/// z_star is the last evaluated f(z). When ‖f(z)‖ is zero the absolute
/// residual stands in for the relative one.
///
/// Throws CertificationError if the layer's bound is not below 1 and
/// NumericError on a non-finite residual. cost_units = iterations × cost_weight.
FixedPointResult fpi_forward(const FpiLayer& layer, std::span<const double> x, const FpiConfig& cfg,
                             double cost_weight = 1.0);

/// Implicit gradient through the fixed point: solves u = g + u·J_z by the
/// Neumann recursion using only vector-Jacobian products, then pulls u back
/// to the input and parameters. Throws NumericError after 5 consecutive
/// growing increments.
GradientBundle fpi_backward(const FpiLayer& layer, std::span<const double> z_star, std::span<const double> x,
                            std::span<const double> grad_out, const FpiConfig& cfg);

/// Backpropagation through k_steps explicit iterations from z0, parameters
/// tied across steps. Verification oracle for fpi_backward.
GradientBundle unrolled_backward_oracle(const FpiLayer& layer, std::span<const double> x, std::span<const double> z0,
                                        int k_steps, std::span<const double> grad_out);

/// Central differences of `loss` around `params`, one coordinate at a time.
Vector finite_diff_grad_oracle(const std::function<double(std::span<const double>)>& loss,
                               std::span<const double> params, double step);

} // namespace dynalay
