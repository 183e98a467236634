#include "mixclass/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace mixc {

namespace {

void check_shapes(const std::vector<Tensor>& params, const std::vector<Tensor>& grads, const std::vector<Tensor>& state) {
    if (params.size() != grads.size() || params.size() != state.size()) {
        throw std::invalid_argument("optimizer: parameter/gradient tensor count mismatch");
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (!params[i].same_shape(grads[i]) || !params[i].same_shape(state[i])) {
            throw std::invalid_argument("optimizer: shape mismatch at tensor " + std::to_string(i) +
                                        " (param " + params[i].shape_str() + ", grad " + grads[i].shape_str() + ")");
        }
    }
}

std::vector<Tensor> zeros_like(const std::vector<Tensor>& params) {
    std::vector<Tensor> out;
    out.reserve(params.size());
    for (const Tensor& p : params) out.emplace_back(Tensor::zeros(p.shape));
    return out;
}

}  // namespace

Adam::Adam(const std::vector<Tensor>& params, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(zeros_like(params)), v_(zeros_like(params)) {}

void Adam::step(std::vector<Tensor>& params, const Gradients& grads) {
    check_shapes(params, grads.tensors, m_);
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        double* p = params[i].ptr();
        double* m = m_[i].ptr();
        double* v = v_[i].ptr();
        const double* g = grads.tensors[i].ptr();
        const std::size_t sz = params[i].numel();
        for (std::size_t k = 0; k < sz; ++k) {
            m[k] = beta1_ * m[k] + (1.0 - beta1_) * g[k];
            v[k] = beta2_ * v[k] + (1.0 - beta2_) * g[k] * g[k];
            const double mhat = m[k] / bc1;
            const double vhat = v[k] / bc2;
            p[k] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
        }
    }
}

SgdMomentum::SgdMomentum(const std::vector<Tensor>& params, double lr, double momentum)
    : lr_(lr), momentum_(momentum), velocity_(zeros_like(params)) {}

void SgdMomentum::step(std::vector<Tensor>& params, const Gradients& grads) {
    check_shapes(params, grads.tensors, velocity_);
    ++t_;
    for (std::size_t i = 0; i < params.size(); ++i) {
        double* p = params[i].ptr();
        double* v = velocity_[i].ptr();
        const double* g = grads.tensors[i].ptr();
        const std::size_t sz = params[i].numel();
        for (std::size_t k = 0; k < sz; ++k) {
            v[k] = momentum_ * v[k] - lr_ * g[k];
            p[k] += v[k];
        }
    }
}

}  // namespace mixc
