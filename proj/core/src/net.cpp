#include "mixclass/net.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <thread>

#include "mixclass/rng.hpp"

namespace mixc {

namespace {

std::atomic<int> g_threads{0};

struct ShapeCHW {
    int c = 0, h = 0, w = 0;
    int numel() const { return c * h * w; }
};

[[noreturn]] void layer_error(std::size_t idx, const std::string& msg) {
    throw std::invalid_argument("layer " + std::to_string(idx) + ": " + msg);
}

// Shapes entering each layer; result[i] is the input of layer i and
// result.back() is the final output. Throws with the offending layer index.
std::vector<ShapeCHW> walk_shapes(const ModelSpec& spec, int h, int w) {
    std::vector<ShapeCHW> shapes;
    ShapeCHW cur{spec.in_channels, h, w};
    shapes.push_back(cur);
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        const LayerSpec& l = spec.layers[i];
        switch (l.kind) {
            case LayerKind::Conv2D:
                if (cur.c != l.in_ch) layer_error(i, "Conv2D expects " + std::to_string(l.in_ch) + " channels, got " + std::to_string(cur.c));
                cur.c = l.out_ch;
                break;
            case LayerKind::ReLU:
                break;
            case LayerKind::MaxPool2:
                if (cur.h % 2 != 0 || cur.w % 2 != 0) layer_error(i, "MaxPool2 requires even spatial dims, got " + std::to_string(cur.h) + "x" + std::to_string(cur.w));
                cur.h /= 2;
                cur.w /= 2;
                break;
            case LayerKind::GlobalAvgPool:
                cur.h = 1;
                cur.w = 1;
                break;
            case LayerKind::Dense:
                if (cur.numel() != l.in_ch) layer_error(i, "Dense expects " + std::to_string(l.in_ch) + " inputs, got " + std::to_string(cur.numel()));
                cur = {l.out_ch, 1, 1};
                break;
        }
        shapes.push_back(cur);
    }
    return shapes;
}

// ---- single-sample kernels -------------------------------------------------

void conv3x3_forward(const double* in, int C, int H, int W, const double* w, const double* b, int OC, double* out) {
    for (int oc = 0; oc < OC; ++oc) {
        for (int y = 0; y < H; ++y) {
            double* orow = out + (static_cast<std::size_t>(oc) * H + y) * W;
            const double bias = b[oc];
            for (int x = 0; x < W; ++x) orow[x] = bias;
            for (int ic = 0; ic < C; ++ic) {
                const double* wk = w + (static_cast<std::size_t>(oc) * C + ic) * 9;
                for (int ky = 0; ky < 3; ++ky) {
                    const int sy = y + ky - 1;
                    if (sy < 0 || sy >= H) continue;
                    const double* irow = in + (static_cast<std::size_t>(ic) * H + sy) * W;
                    for (int kx = 0; kx < 3; ++kx) {
                        const double wv = wk[ky * 3 + kx];
                        const int dx = kx - 1;
                        const int x0 = std::max(0, -dx);
                        const int x1 = std::min(W, W - dx);
                        const double* src = irow + dx;
                        for (int x = x0; x < x1; ++x) orow[x] += wv * src[x];
                    }
                }
            }
        }
    }
}

void conv3x3_backward_input(const double* dout, int C, int H, int W, const double* w, int OC, double* din) {
    std::fill(din, din + static_cast<std::size_t>(C) * H * W, 0.0);
    for (int ic = 0; ic < C; ++ic) {
        for (int sy = 0; sy < H; ++sy) {
            double* drow = din + (static_cast<std::size_t>(ic) * H + sy) * W;
            for (int oc = 0; oc < OC; ++oc) {
                const double* wk = w + (static_cast<std::size_t>(oc) * C + ic) * 9;
                for (int ky = 0; ky < 3; ++ky) {
                    const int y = sy - ky + 1;
                    if (y < 0 || y >= H) continue;
                    const double* gout = dout + (static_cast<std::size_t>(oc) * H + y) * W;
                    for (int kx = 0; kx < 3; ++kx) {
                        const double wv = wk[ky * 3 + kx];
                        // forward read in[sx] for out[x] with sx = x + kx - 1
                        const int x0 = std::max(0, kx - 1);
                        const int x1 = std::min(W, W + kx - 1);
                        const double* src = gout - kx + 1;
                        for (int sx = x0; sx < x1; ++sx) drow[sx] += wv * src[sx];
                    }
                }
            }
        }
    }
}

void conv3x3_backward_params(const double* in, const double* dout, int C, int H, int W, int OC, double* dw, double* db) {
    for (int oc = 0; oc < OC; ++oc) {
        double bacc = 0.0;
        const double* gbase = dout + static_cast<std::size_t>(oc) * H * W;
        for (int i = 0; i < H * W; ++i) bacc += gbase[i];
        db[oc] = bacc;
        for (int ic = 0; ic < C; ++ic) {
            double* wgrad = dw + (static_cast<std::size_t>(oc) * C + ic) * 9;
            for (int ky = 0; ky < 3; ++ky) {
                for (int kx = 0; kx < 3; ++kx) {
                    const int dx = kx - 1;
                    double acc = 0.0;
                    for (int y = 0; y < H; ++y) {
                        const int sy = y + ky - 1;
                        if (sy < 0 || sy >= H) continue;
                        const double* grow = gbase + static_cast<std::size_t>(y) * W;
                        const double* irow = in + (static_cast<std::size_t>(ic) * H + sy) * W + dx;
                        const int x0 = std::max(0, -dx);
                        const int x1 = std::min(W, W - dx);
                        for (int x = x0; x < x1; ++x) acc += grow[x] * irow[x];
                    }
                    wgrad[ky * 3 + kx] = acc;
                }
            }
        }
    }
}

void maxpool2_forward(const double* in, int C, int H, int W, double* out, std::uint8_t* idx) {
    const int OH = H / 2, OW = W / 2;
    for (int c = 0; c < C; ++c) {
        for (int y = 0; y < OH; ++y) {
            const double* r0 = in + (static_cast<std::size_t>(c) * H + 2 * y) * W;
            const double* r1 = r0 + W;
            double* orow = out + (static_cast<std::size_t>(c) * OH + y) * OW;
            std::uint8_t* irow = idx + (static_cast<std::size_t>(c) * OH + y) * OW;
            for (int x = 0; x < OW; ++x) {
                const double v[4] = {r0[2 * x], r0[2 * x + 1], r1[2 * x], r1[2 * x + 1]};
                int best = 0;
                for (int k = 1; k < 4; ++k) {
                    if (v[k] > v[best]) best = k;
                }
                orow[x] = v[best];
                irow[x] = static_cast<std::uint8_t>(best);
            }
        }
    }
}

void maxpool2_backward(const double* dout, int C, int H, int W, const std::uint8_t* idx, double* din) {
    const int OH = H / 2, OW = W / 2;
    std::fill(din, din + static_cast<std::size_t>(C) * H * W, 0.0);
    for (int c = 0; c < C; ++c) {
        for (int y = 0; y < OH; ++y) {
            const double* grow = dout + (static_cast<std::size_t>(c) * OH + y) * OW;
            const std::uint8_t* irow = idx + (static_cast<std::size_t>(c) * OH + y) * OW;
            double* r0 = din + (static_cast<std::size_t>(c) * H + 2 * y) * W;
            double* r1 = r0 + W;
            for (int x = 0; x < OW; ++x) {
                const int k = irow[x];
                double* cell = (k < 2) ? (r0 + 2 * x + k) : (r1 + 2 * x + (k - 2));
                *cell += grow[x];
            }
        }
    }
}

void gap_forward(const double* in, int C, int H, int W, double* out) {
    const double inv = 1.0 / (static_cast<double>(H) * W);
    for (int c = 0; c < C; ++c) {
        const double* base = in + static_cast<std::size_t>(c) * H * W;
        double acc = 0.0;
        for (int i = 0; i < H * W; ++i) acc += base[i];
        out[c] = acc * inv;
    }
}

void gap_backward(const double* dout, int C, int H, int W, double* din) {
    const double inv = 1.0 / (static_cast<double>(H) * W);
    for (int c = 0; c < C; ++c) {
        const double g = dout[c] * inv;
        double* base = din + static_cast<std::size_t>(c) * H * W;
        for (int i = 0; i < H * W; ++i) base[i] = g;
    }
}

void dense_forward(const double* in, int IN, const double* w, const double* b, int OUT, double* out) {
    for (int o = 0; o < OUT; ++o) {
        const double* wr = w + static_cast<std::size_t>(o) * IN;
        double acc = b[o];
        for (int i = 0; i < IN; ++i) acc += wr[i] * in[i];
        out[o] = acc;
    }
}

void softmax_inplace(double* v, int n) {
    double m = v[0];
    for (int i = 1; i < n; ++i) m = std::max(m, v[i]);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        v[i] = std::exp(v[i] - m);
        sum += v[i];
    }
    const double inv = 1.0 / sum;
    for (int i = 0; i < n; ++i) v[i] *= inv;
}

// Per-sample activations. act[i] holds the input of layer i; act[L] the
// final logits. pool_idx aligned with layers (empty unless MaxPool2).
struct SampleCache {
    std::vector<std::vector<double>> act;
    std::vector<std::vector<std::uint8_t>> pool_idx;
};

void forward_sample(const Model& m, const std::vector<ShapeCHW>& shapes, const double* input, SampleCache& cache) {
    const std::size_t L = m.spec.layers.size();
    cache.act.resize(L + 1);
    cache.pool_idx.assign(L, {});
    cache.act[0].assign(input, input + shapes[0].numel());
    std::size_t p = 0;
    for (std::size_t i = 0; i < L; ++i) {
        const LayerSpec& l = m.spec.layers[i];
        const ShapeCHW& in = shapes[i];
        const ShapeCHW& out = shapes[i + 1];
        cache.act[i + 1].assign(out.numel(), 0.0);
        const double* src = cache.act[i].data();
        double* dst = cache.act[i + 1].data();
        switch (l.kind) {
            case LayerKind::Conv2D:
                conv3x3_forward(src, in.c, in.h, in.w, m.params[p].ptr(), m.params[p + 1].ptr(), l.out_ch, dst);
                p += 2;
                break;
            case LayerKind::ReLU:
                for (int k = 0; k < in.numel(); ++k) dst[k] = src[k] > 0.0 ? src[k] : 0.0;
                break;
            case LayerKind::MaxPool2:
                cache.pool_idx[i].assign(out.numel(), 0);
                maxpool2_forward(src, in.c, in.h, in.w, dst, cache.pool_idx[i].data());
                break;
            case LayerKind::GlobalAvgPool:
                gap_forward(src, in.c, in.h, in.w, dst);
                break;
            case LayerKind::Dense:
                dense_forward(src, l.in_ch, m.params[p].ptr(), m.params[p + 1].ptr(), l.out_ch, dst);
                p += 2;
                break;
        }
    }
}

// Backprop one sample; param gradients are written (not accumulated) into
// grad_out, which must be shaped like the model parameters.
void backward_sample(const Model& m, const std::vector<ShapeCHW>& shapes, const SampleCache& cache,
                     std::vector<double> dlogits, std::vector<Tensor>& grad_out) {
    const std::size_t L = m.spec.layers.size();
    std::vector<double> dcur = std::move(dlogits);
    std::vector<double> dprev;
    std::size_t p = m.params.size();
    for (std::size_t ii = L; ii-- > 0;) {
        const LayerSpec& l = m.spec.layers[ii];
        const ShapeCHW& in = shapes[ii];
        dprev.assign(in.numel(), 0.0);
        const double* src = cache.act[ii].data();
        switch (l.kind) {
            case LayerKind::Dense: {
                p -= 2;
                double* dw = grad_out[p].ptr();
                double* db = grad_out[p + 1].ptr();
                const double* w = m.params[p].ptr();
                for (int o = 0; o < l.out_ch; ++o) {
                    const double g = dcur[o];
                    db[o] = g;
                    double* dwr = dw + static_cast<std::size_t>(o) * l.in_ch;
                    const double* wr = w + static_cast<std::size_t>(o) * l.in_ch;
                    for (int i = 0; i < l.in_ch; ++i) {
                        dwr[i] = g * src[i];
                        dprev[i] += wr[i] * g;
                    }
                }
                break;
            }
            case LayerKind::GlobalAvgPool:
                gap_backward(dcur.data(), in.c, in.h, in.w, dprev.data());
                break;
            case LayerKind::MaxPool2:
                maxpool2_backward(dcur.data(), in.c, in.h, in.w, cache.pool_idx[ii].data(), dprev.data());
                break;
            case LayerKind::ReLU:
                for (int k = 0; k < in.numel(); ++k) dprev[k] = src[k] > 0.0 ? dcur[k] : 0.0;
                break;
            case LayerKind::Conv2D: {
                p -= 2;
                conv3x3_backward_params(src, dcur.data(), in.c, in.h, in.w, l.out_ch, grad_out[p].ptr(), grad_out[p + 1].ptr());
                conv3x3_backward_input(dcur.data(), in.c, in.h, in.w, m.params[p].ptr(), l.out_ch, dprev.data());
                break;
            }
        }
        std::swap(dcur, dprev);
    }
}

template <class Fn>
void parallel_over_samples(int n, Fn&& fn) {
    const int want = num_threads();
    const int t = std::max(1, std::min(want, n));
    if (t == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(t);
    std::atomic<int> next{0};
    for (int k = 0; k < t; ++k) {
        pool.emplace_back([&] {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= n) return;
                fn(i);
            }
        });
    }
    for (auto& th : pool) th.join();
}

std::vector<Tensor> zero_like(const std::vector<Tensor>& params) {
    std::vector<Tensor> g;
    g.reserve(params.size());
    for (const Tensor& t : params) g.emplace_back(Tensor::zeros(t.shape));
    return g;
}

void check_batch(const Model& m, const Tensor& batch) {
    if (batch.shape.size() != 4) throw std::invalid_argument("forward: batch must be [N,C,H,W], got shape " + batch.shape_str());
    if (static_cast<int>(batch.shape[1]) != m.spec.in_channels) {
        throw std::invalid_argument("layer 0: batch has " + std::to_string(batch.shape[1]) + " channels, model expects " + std::to_string(m.spec.in_channels));
    }
    std::size_t expect = 0;
    for (const LayerSpec& l : m.spec.layers) {
        if (l.has_params()) expect += 2;
    }
    if (m.params.size() != expect) throw std::invalid_argument("model parameters not initialized (have " + std::to_string(m.params.size()) + ", expected " + std::to_string(expect) + " tensors)");
}

}  // namespace

int num_threads() {
    int t = g_threads.load();
    if (t > 0) return t;
    if (const char* env = std::getenv("MIXC_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) {
            g_threads.store(n);
            return n;
        }
    }
    t = static_cast<int>(std::thread::hardware_concurrency());
    if (t <= 0) t = 1;
    g_threads.store(t);
    return t;
}

void set_num_threads(int n) {
    g_threads.store(std::max(1, n));
}

void ModelSpec::validate() const {
    if (layers.empty()) throw std::invalid_argument("ModelSpec: no layers");
    if (in_channels != 1 && in_channels != 3) throw std::invalid_argument("ModelSpec: in_channels must be 1 or 3");
    int cur = in_channels;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const LayerSpec& l = layers[i];
        switch (l.kind) {
            case LayerKind::Conv2D:
                if (l.in_ch != cur) layer_error(i, "Conv2D in_ch " + std::to_string(l.in_ch) + " does not match incoming " + std::to_string(cur));
                if (l.out_ch <= 0) layer_error(i, "Conv2D out_ch must be positive");
                cur = l.out_ch;
                break;
            case LayerKind::Dense:
                if (l.in_ch <= 0 || l.out_ch <= 0) layer_error(i, "Dense dims must be positive");
                cur = l.out_ch;
                break;
            default:
                break;
        }
    }
    const LayerSpec& last = layers.back();
    if (last.kind != LayerKind::Dense || last.out_ch != kNumClasses) {
        throw std::invalid_argument("ModelSpec: final layer must be Dense with " + std::to_string(kNumClasses) + " outputs");
    }
}

ModelSpec ModelSpec::spraynet(int in_channels) {
    ModelSpec s;
    s.in_channels = in_channels;
    s.layers = {
        LayerSpec::conv(in_channels, 8),  LayerSpec::relu(), LayerSpec::maxpool(),
        LayerSpec::conv(8, 16),           LayerSpec::relu(), LayerSpec::maxpool(),
        LayerSpec::conv(16, 32),          LayerSpec::relu(), LayerSpec::maxpool(),
        LayerSpec::gap(),                 LayerSpec::dense(32, kNumClasses),
    };
    s.validate();
    return s;
}

std::vector<std::vector<std::size_t>> param_shapes(const ModelSpec& spec) {
    std::vector<std::vector<std::size_t>> shapes;
    for (const LayerSpec& l : spec.layers) {
        if (l.kind == LayerKind::Conv2D) {
            shapes.push_back({static_cast<std::size_t>(l.out_ch), static_cast<std::size_t>(l.in_ch), 3, 3});
            shapes.push_back({static_cast<std::size_t>(l.out_ch)});
        } else if (l.kind == LayerKind::Dense) {
            shapes.push_back({static_cast<std::size_t>(l.out_ch), static_cast<std::size_t>(l.in_ch)});
            shapes.push_back({static_cast<std::size_t>(l.out_ch)});
        }
    }
    return shapes;
}

Model Model::init(const ModelSpec& spec, std::uint64_t seed) {
    spec.validate();
    Model m;
    m.spec = spec;
    Rng rng = Rng::substream(seed, {0x1217u});
    for (const LayerSpec& l : spec.layers) {
        if (l.kind == LayerKind::Conv2D) {
            Tensor w({static_cast<std::size_t>(l.out_ch), static_cast<std::size_t>(l.in_ch), 3, 3});
            const double limit = std::sqrt(6.0 / (l.in_ch * 9.0));
            for (double& v : w.data) v = rng.uniform(-limit, limit);
            m.params.push_back(std::move(w));
            m.params.emplace_back(Tensor({static_cast<std::size_t>(l.out_ch)}));
        } else if (l.kind == LayerKind::Dense) {
            Tensor w({static_cast<std::size_t>(l.out_ch), static_cast<std::size_t>(l.in_ch)});
            const double limit = std::sqrt(6.0 / l.in_ch);
            for (double& v : w.data) v = rng.uniform(-limit, limit);
            m.params.push_back(std::move(w));
            m.params.emplace_back(Tensor({static_cast<std::size_t>(l.out_ch)}));
        }
    }
    return m;
}

double soft_cross_entropy(const Tensor& probs, const std::vector<SoftLabel>& targets) {
    constexpr double kLogClip = 1e-12;
    if (probs.shape.size() != 2 || probs.shape[1] != kNumClasses) {
        throw std::invalid_argument("soft_cross_entropy: probs must be [N," + std::to_string(kNumClasses) + "]");
    }
    const std::size_t n = probs.shape[0];
    if (targets.size() != n) throw std::invalid_argument("soft_cross_entropy: target count mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        targets[i].check_valid();
        const double* row = probs.ptr() + i * kNumClasses;
        double ce = 0.0;
        for (int c = 0; c < kNumClasses; ++c) {
            ce -= targets[i].probs[c] * std::log(std::max(row[c], kLogClip));
        }
        total += ce;
    }
    return total / static_cast<double>(n);
}

Tensor forward(const Model& m, const Tensor& batch) {
    check_batch(m, batch);
    const int n = static_cast<int>(batch.shape[0]);
    const auto shapes = walk_shapes(m.spec, static_cast<int>(batch.shape[2]), static_cast<int>(batch.shape[3]));
    const std::size_t sample_sz = shapes[0].numel();
    Tensor out({static_cast<std::size_t>(n), kNumClasses});
    parallel_over_samples(n, [&](int i) {
        SampleCache cache;
        forward_sample(m, shapes, batch.ptr() + i * sample_sz, cache);
        double* row = out.ptr() + static_cast<std::size_t>(i) * kNumClasses;
        std::copy(cache.act.back().begin(), cache.act.back().end(), row);
        softmax_inplace(row, kNumClasses);
    });
    return out;
}

BackwardResult backward(const Model& m, const Tensor& batch, const std::vector<SoftLabel>& targets) {
    check_batch(m, batch);
    const int n = static_cast<int>(batch.shape[0]);
    if (static_cast<int>(targets.size()) != n) throw std::invalid_argument("backward: target count mismatch");
    for (const SoftLabel& t : targets) t.check_valid();

    const auto shapes = walk_shapes(m.spec, static_cast<int>(batch.shape[2]), static_cast<int>(batch.shape[3]));
    const std::size_t sample_sz = shapes[0].numel();
    constexpr double kLogClip = 1e-12;

    BackwardResult res;
    res.probs = Tensor({static_cast<std::size_t>(n), kNumClasses});
    std::vector<std::vector<Tensor>> sample_grads(n);
    std::vector<double> sample_loss(n, 0.0);
    const double inv_n = 1.0 / static_cast<double>(n);

    parallel_over_samples(n, [&](int i) {
        SampleCache cache;
        forward_sample(m, shapes, batch.ptr() + i * sample_sz, cache);
        double* prow = res.probs.ptr() + static_cast<std::size_t>(i) * kNumClasses;
        std::copy(cache.act.back().begin(), cache.act.back().end(), prow);
        softmax_inplace(prow, kNumClasses);

        double ce = 0.0;
        std::vector<double> dlogits(kNumClasses);
        for (int c = 0; c < kNumClasses; ++c) {
            ce -= targets[i].probs[c] * std::log(std::max(prow[c], kLogClip));
            dlogits[c] = (prow[c] - targets[i].probs[c]) * inv_n;
        }
        sample_loss[i] = ce;
        sample_grads[i] = zero_like(m.params);
        backward_sample(m, shapes, cache, std::move(dlogits), sample_grads[i]);
    });

    // Fixed reduction order (sample 0..N-1) keeps results independent of the
    // thread schedule.
    res.grads.tensors = zero_like(m.params);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        total += sample_loss[i];
        for (std::size_t p = 0; p < m.params.size(); ++p) {
            double* acc = res.grads.tensors[p].ptr();
            const double* g = sample_grads[i][p].ptr();
            const std::size_t sz = res.grads.tensors[p].numel();
            for (std::size_t k = 0; k < sz; ++k) acc[k] += g[k];
        }
    }
    res.loss = total * inv_n;
    return res;
}

}  // namespace mixc
