#include "dynalay/fpi_engine.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "dynalay/error.hpp"

namespace dynalay {

void FpiConfig::validate() const {
    if (max_iter < 1) throw InputError("fpi.max_iter must be >= 1");
    if (!(forward_tol > 0.0)) throw InputError("fpi.forward_tol must be > 0");
    if (!(backward_tol > 0.0)) throw InputError("fpi.backward_tol must be > 0");
}

FpiGrad FpiGrad::zeros_like(const FpiLayer& layer) {
    return {DenseMatrix(layer.state_dim(), layer.state_dim()), DenseMatrix(layer.state_dim(), layer.input_dim()),
            Vector(layer.state_dim(), 0.0)};
}

void FpiGrad::add(const FpiGrad& other) {
    axpy(1.0, other.wz.data(), wz.data());
    axpy(1.0, other.wx.data(), wx.data());
    axpy(1.0, other.b, b);
}

FixedPointResult fpi_forward(const FpiLayer& layer, std::span<const double> x, const FpiConfig& cfg,
                             double cost_weight) {
    cfg.validate();
    if (!(layer.certified_bound() < 1.0)) {
        std::ostringstream os;
        os << "fpi_forward: layer is not a certified contraction (bound " << layer.certified_bound() << ")";
        throw CertificationError(os.str());
    }
    if (x.size() != layer.input_dim()) throw InputError("fpi_forward: input length mismatch");

    FixedPointResult result;
    Vector z(layer.state_dim(), 0.0);
    if (cfg.z0_policy == Z0Policy::CopyInput) {
        if (x.size() != z.size()) throw InputError("fpi_forward: CopyInput needs input dim == state dim");
        z.assign(x.begin(), x.end());
    }

    for (int k = 0; k < cfg.max_iter; ++k) {
        Vector f0 = fpi_layer_forward(layer, z, x);
        const double abs_res = distance(f0, z);
        const double fn = norm2(f0);
        const double rel_res = fn > 0.0 ? abs_res / fn : abs_res;
        if (!std::isfinite(rel_res)) {
            throw NumericError("fpi_forward: non-finite residual at iteration " + std::to_string(k + 1));
        }
        result.iterations = k + 1;
        result.residuals.push_back(rel_res);
        result.abs_residuals.push_back(abs_res);
        z = std::move(f0);
        if (rel_res < cfg.forward_tol) {
            result.converged = true;
            break;
        }
    }
    result.z_star = std::move(z);
    result.cost_units = result.iterations * cost_weight;
    return result;
}

GradientBundle fpi_backward(const FpiLayer& layer, std::span<const double> z_star, std::span<const double> x,
                            std::span<const double> grad_out, const FpiConfig& cfg) {
    cfg.validate();
    const std::size_t d = layer.state_dim();
    if (z_star.size() != d || grad_out.size() != d) throw InputError("fpi_backward: state length mismatch");

    // J_z = diag(φ′(p))·w_z at the fixed point; u·J_z = w_zᵀ(u ⊙ φ′(p)).
    const Vector dphi = activation_derivative(layer.activation(), fpi_layer_preactivation(layer, z_star, x));
    Vector scratch(d);
    auto vjp_z = [&](const Vector& u) {
        for (std::size_t i = 0; i < d; ++i) scratch[i] = u[i] * dphi[i];
        return matvec_transposed(layer.w_z(), scratch);
    };

    Vector u(grad_out.begin(), grad_out.end());
    double prev_step = std::numeric_limits<double>::infinity();
    int growth_streak = 0;
    int iterations = 0;
    for (int k = 0; k < cfg.max_iter; ++k) {
        Vector u_new = vjp_z(u);
        for (std::size_t i = 0; i < d; ++i) u_new[i] += grad_out[i];
        iterations = k + 1;

        const double step = distance(u_new, u);
        const double un = norm2(u_new);
        if (!std::isfinite(step) || !std::isfinite(un))
            throw NumericError("fpi_backward: non-finite adjoint at iteration " + std::to_string(iterations));
        growth_streak = step > prev_step ? growth_streak + 1 : 0;
        if (growth_streak >= 5) {
            std::ostringstream os;
            os << "fpi_backward: adjoint iteration diverging (certified bound " << layer.certified_bound() << ")";
            throw NumericError(os.str());
        }
        prev_step = step;
        u = std::move(u_new);
        const double delta = un > 0.0 ? step / un : step;
        if (delta < cfg.backward_tol) break;
    }

    FpiLayerVjp pulled = fpi_layer_vjp(layer, z_star, x, u);
    return GradientBundle{std::move(u), std::move(pulled.u_x),
                          FpiGrad{std::move(pulled.grad_wz), std::move(pulled.grad_wx), std::move(pulled.grad_b)},
                          iterations};
}

GradientBundle unrolled_backward_oracle(const FpiLayer& layer, std::span<const double> x, std::span<const double> z0,
                                        int k_steps, std::span<const double> grad_out) {
    if (k_steps < 1) throw InputError("unrolled_backward_oracle: k_steps must be >= 1");
    std::vector<Vector> states;
    states.reserve(static_cast<std::size_t>(k_steps) + 1);
    states.emplace_back(z0.begin(), z0.end());
    for (int k = 0; k < k_steps; ++k) states.push_back(fpi_layer_forward(layer, states.back(), x));

    GradientBundle out{Vector(grad_out.begin(), grad_out.end()), Vector(layer.input_dim(), 0.0),
                       FpiGrad::zeros_like(layer), k_steps};
    for (int k = k_steps - 1; k >= 0; --k) {
        FpiLayerVjp step = fpi_layer_vjp(layer, states[static_cast<std::size_t>(k)], x, out.u);
        axpy(1.0, step.u_x, out.grad_x);
        out.params.add(FpiGrad{std::move(step.grad_wz), std::move(step.grad_wx), std::move(step.grad_b)});
        out.u = std::move(step.u_z);
    }
    return out;
}

Vector finite_diff_grad_oracle(const std::function<double(std::span<const double>)>& loss,
                               std::span<const double> params, double step) {
    if (!(step > 0.0)) throw InputError("finite_diff_grad_oracle: step must be > 0");
    Vector theta(params.begin(), params.end());
    Vector grad(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const double orig = theta[i];
        theta[i] = orig + step;
        const double up = loss(theta);
        theta[i] = orig - step;
        const double down = loss(theta);
        theta[i] = orig;
        grad[i] = (up - down) / (2.0 * step);
    }
    return grad;
}

} // namespace dynalay
