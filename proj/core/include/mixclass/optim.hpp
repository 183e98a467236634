#pragma once

#include <cstdint>
#include <vector>

#include "mixclass/net.hpp"
#include "mixclass/tensor.hpp"

namespace mixc {

// Standard bias-corrected Adam. Moment tensors match parameter shapes.
class Adam {
   public:
    Adam(const std::vector<Tensor>& params, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

    void step(std::vector<Tensor>& params, const Gradients& grads);

    double lr() const { return lr_; }
    void set_lr(double lr) { lr_ = lr; }
    std::int64_t step_count() const { return t_; }

   private:
    double lr_, beta1_, beta2_, eps_;
    std::int64_t t_ = 0;
    std::vector<Tensor> m_, v_;
};

// v <- mu*v - lr*g;  p <- p + v.
class SgdMomentum {
   public:
    SgdMomentum(const std::vector<Tensor>& params, double lr, double momentum = 0.9);

    void step(std::vector<Tensor>& params, const Gradients& grads);

    double lr() const { return lr_; }
    void set_lr(double lr) { lr_ = lr; }
    std::int64_t step_count() const { return t_; }

   private:
    double lr_, momentum_;
    std::int64_t t_ = 0;
    std::vector<Tensor> velocity_;
};

}  // namespace mixc
