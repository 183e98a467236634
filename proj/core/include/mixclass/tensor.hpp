#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace mixc {

// Dense row-major float64 tensor. data.size() always equals the product of
// shape; every public operation keeps values finite for finite inputs.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> s);

    static Tensor zeros(std::vector<std::size_t> s) { return Tensor(std::move(s)); }

    std::size_t numel() const { return data.size(); }
    bool same_shape(const Tensor& o) const { return shape == o.shape; }
    bool all_finite() const;
    std::string shape_str() const;

    double* ptr() { return data.data(); }
    const double* ptr() const { return data.data(); }
};

std::size_t shape_numel(const std::vector<std::size_t>& shape);

}  // namespace mixc
