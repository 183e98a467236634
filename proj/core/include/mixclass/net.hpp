#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mixclass/tensor.hpp"
#include "mixclass/types.hpp"

namespace mixc {

enum class LayerKind { Conv2D, ReLU, MaxPool2, GlobalAvgPool, Dense };

// Conv2D is fixed 3x3, stride 1, zero padding 1 (shape-preserving).
// MaxPool2 is 2x2, stride 2. Dense maps in_ch values to out_ch.
struct LayerSpec {
    LayerKind kind;
    int in_ch = 0;
    int out_ch = 0;

    static LayerSpec conv(int in_ch, int out_ch) { return {LayerKind::Conv2D, in_ch, out_ch}; }
    static LayerSpec relu() { return {LayerKind::ReLU, 0, 0}; }
    static LayerSpec maxpool() { return {LayerKind::MaxPool2, 0, 0}; }
    static LayerSpec gap() { return {LayerKind::GlobalAvgPool, 0, 0}; }
    static LayerSpec dense(int in, int out) { return {LayerKind::Dense, in, out}; }

    bool has_params() const { return kind == LayerKind::Conv2D || kind == LayerKind::Dense; }
    bool operator==(const LayerSpec&) const = default;
};

struct ModelSpec {
    int in_channels = 1;
    std::vector<LayerSpec> layers;

    // Adjacent layer shapes must compose and the final Dense must emit
    // exactly kNumClasses outputs. Throws naming the offending layer index.
    void validate() const;

    // Conv(C->8)-ReLU-Pool, Conv(8->16)-ReLU-Pool, Conv(16->32)-ReLU-Pool,
    // GAP, Dense(32->4). Input H and W stay free: GAP absorbs them.
    static ModelSpec spraynet(int in_channels);

    bool operator==(const ModelSpec&) const = default;
};

struct Model {
    ModelSpec spec;
    // Parameter tensors in declaration order: (weight, bias) per parametric
    // layer. Conv weight is [out_ch, in_ch, 3, 3], Dense weight [out, in].
    std::vector<Tensor> params;

    // He-uniform fan-in init for weights, zero biases. Deterministic in seed.
    static Model init(const ModelSpec& spec, std::uint64_t seed);
};

struct Gradients {
    std::vector<Tensor> tensors;  // aligned with Model::params
};

// Shapes of the parameter tensors in declaration order.
std::vector<std::vector<std::size_t>> param_shapes(const ModelSpec& spec);

// Mean over the batch of -sum_c target_c * log(max(pred_c, 1e-12)).
// pred rows must be probability vectors; invalid targets are rejected.
double soft_cross_entropy(const Tensor& probs, const std::vector<SoftLabel>& targets);

// Forward pass: batch is [N, C, H, W], returns [N, kNumClasses] class
// probabilities (softmax applied). Deterministic for fixed inputs.
Tensor forward(const Model& m, const Tensor& batch);

struct BackwardResult {
    Gradients grads;
    double loss = 0.0;
    Tensor probs;  // [N, kNumClasses], same values forward() would produce
};

// Gradients of soft_cross_entropy(forward(m, batch), targets) with respect
// to every parameter. Reduction order over the batch is fixed (sample 0..N-1)
// so results are identical for any thread count.
BackwardResult backward(const Model& m, const Tensor& batch, const std::vector<SoftLabel>& targets);

// Thread pool width used for batch-parallel forward/backward. Defaults to
// the MIXC_THREADS env var, else hardware concurrency.
int num_threads();
void set_num_threads(int n);

}  // namespace mixc
