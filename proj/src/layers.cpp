#include "dynalay/layers.hpp"

#include <cmath>
#include <string>

#include "dynalay/error.hpp"
#include "dynalay/rng.hpp"

namespace dynalay {
namespace {

void require_len(std::span<const double> v, std::size_t n, const char* what) {
    if (v.size() != n)
        throw InputError(std::string(what) + ": expected length " + std::to_string(n) + ", got " +
                         std::to_string(v.size()));
}

} // namespace

FpiLayer::FpiLayer(DenseMatrix w_z, DenseMatrix w_x, Vector b, Activation act, double contraction_target)
    : w_z_(std::move(w_z)), w_x_(std::move(w_x)), b_(std::move(b)), act_(act), target_(contraction_target) {
    if (w_z_.rows() != w_z_.cols())
        throw InputError("FpiLayer: state map must be square (endomorphic), got " + std::to_string(w_z_.rows()) +
                         "x" + std::to_string(w_z_.cols()));
    if (w_x_.rows() != w_z_.rows()) throw InputError("FpiLayer: w_x rows must equal state dimension");
    require_len(b_, w_z_.rows(), "FpiLayer bias");
    if (!(target_ > 0.0 && target_ < 1.0)) throw InputError("FpiLayer: contraction_target must lie in (0, 1)");
    if (!all_finite(b_)) throw InputError("FpiLayer: non-finite bias");
    bound_ = spectral_norm_estimate(w_z_, kCertifyPowerIters, kCertifySeed) * activation_lipschitz(act_);
}

FpiLayer FpiLayer::with_params(DenseMatrix w_z, DenseMatrix w_x, Vector b) const {
    return FpiLayer(std::move(w_z), std::move(w_x), std::move(b), act_, target_);
}

Vector fpi_layer_preactivation(const FpiLayer& layer, std::span<const double> z, std::span<const double> x) {
    require_len(z, layer.state_dim(), "fpi_layer_forward state");
    require_len(x, layer.input_dim(), "fpi_layer_forward input");
    Vector p = matvec(layer.w_z(), z);
    const Vector injected = matvec(layer.w_x(), x);
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = p[i] + injected[i] + layer.b()[i];
    return p;
}

Vector fpi_layer_forward(const FpiLayer& layer, std::span<const double> z, std::span<const double> x) {
    return apply_activation(layer.activation(), fpi_layer_preactivation(layer, z, x));
}

FpiLayer enforce_contraction(const FpiLayer& layer) {
    const double bound = layer.certified_bound();
    if (bound <= layer.contraction_target() + kCertificationSlack) return layer;
    const double factor = layer.contraction_target() / bound;
    return layer.with_params(layer.w_z().scaled(factor), layer.w_x(), layer.b());
}

double lipschitz_bound(const FpiLayer& layer) { return layer.certified_bound(); }

FpiLayerVjp fpi_layer_vjp(const FpiLayer& layer, std::span<const double> z, std::span<const double> x,
                          std::span<const double> u) {
    require_len(u, layer.state_dim(), "fpi_layer_vjp cotangent");
    const Vector p = fpi_layer_preactivation(layer, z, x);
    Vector s = activation_derivative(layer.activation(), p);
    for (std::size_t i = 0; i < s.size(); ++i) s[i] *= u[i];

    FpiLayerVjp out{matvec_transposed(layer.w_z(), s), matvec_transposed(layer.w_x(), s),
                    DenseMatrix(layer.state_dim(), layer.state_dim()),
                    DenseMatrix(layer.state_dim(), layer.input_dim()), s};
    add_outer(out.grad_wz, s, z);
    add_outer(out.grad_wx, s, x);
    return out;
}

FpiLayer random_fpi_layer(std::size_t d, std::size_t m, std::uint64_t seed, Activation act,
                          double contraction_target, double scale) {
    Rng rng(seed);
    DenseMatrix wz(d, d), wx(d, m);
    Vector b(d);
    const double sz = scale / std::sqrt(static_cast<double>(d));
    const double sx = scale / std::sqrt(static_cast<double>(m));
    for (double& v : wz.data()) v = rng.normal(0.0, sz);
    for (double& v : wx.data()) v = rng.normal(0.0, sx);
    for (double& v : b) v = rng.normal(0.0, 0.1 * scale);
    return enforce_contraction(FpiLayer(std::move(wz), std::move(wx), std::move(b), act, contraction_target));
}

Vector dense_preactivation(const DenseLayer& layer, std::span<const double> x) {
    require_len(x, layer.input_dim(), "dense_forward input");
    Vector p = matvec(layer.w, x);
    for (std::size_t i = 0; i < p.size(); ++i) p[i] += layer.b[i];
    return p;
}

Vector dense_forward(const DenseLayer& layer, std::span<const double> x) {
    return apply_activation(layer.act, dense_preactivation(layer, x));
}

DenseLayerVjp dense_vjp(const DenseLayer& layer, std::span<const double> x, std::span<const double> u) {
    require_len(u, layer.output_dim(), "dense_vjp cotangent");
    const Vector p = dense_preactivation(layer, x);
    Vector s = activation_derivative(layer.act, p);
    for (std::size_t i = 0; i < s.size(); ++i) s[i] *= u[i];
    DenseLayerVjp out{matvec_transposed(layer.w, s), DenseMatrix(layer.output_dim(), layer.input_dim()), s};
    add_outer(out.grad_w, s, x);
    return out;
}

DenseGrad DenseGrad::zeros_like(const DenseLayer& layer) {
    return {DenseMatrix(layer.output_dim(), layer.input_dim()), Vector(layer.output_dim(), 0.0)};
}

void DenseGrad::add(const DenseGrad& other) {
    axpy(1.0, other.w.data(), w.data());
    axpy(1.0, other.b, b);
}

DenseLayer random_dense_layer(std::size_t in, std::size_t out, Activation act, std::uint64_t seed, double scale) {
    Rng rng(seed);
    DenseLayer layer{DenseMatrix(out, in), Vector(out, 0.0), act};
    const double s = scale / std::sqrt(static_cast<double>(in));
    for (double& v : layer.w.data()) v = rng.normal(0.0, s);
    return layer;
}

DenseLayer zero_dense_layer(std::size_t in, std::size_t out, Activation act) {
    return DenseLayer{DenseMatrix(out, in), Vector(out, 0.0), act};
}

} // namespace dynalay
