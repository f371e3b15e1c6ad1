#pragma once

// Layer-level forward/backward passes for the 1D Self-ONN.
//
// A generative convolution replaces each kernel tap w(r) of a plain 1D
// convolution with a degree-Q polynomial without constant term:
//
//   out[k][m] = b[k] + sum_i sum_r sum_{q=1..Q} w_ik[r][q] * in[i][m + r - K/2]^q
//
// Inputs outside [0, M) read as zero, so output length equals input length.
// With Q = 1 this is exactly the convolutional neuron.

#include "sonn/rng.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace sonn {

struct FeatureMaps {
    std::size_t neurons = 0;
    std::size_t length = 0;
    std::vector<double> values;  ///< row-major [neuron][t]

    FeatureMaps() = default;
    FeatureMaps(std::size_t n, std::size_t m, double fill = 0.0) : neurons(n), length(m), values(n * m, fill) {}

    double& at(std::size_t n, std::size_t t) { return values[n * length + t]; }
    double at(std::size_t n, std::size_t t) const { return values[n * length + t]; }
    std::span<double> row(std::size_t n) { return {values.data() + n * length, length}; }
    std::span<const double> row(std::size_t n) const { return {values.data() + n * length, length}; }
};

class GenerativeConvLayer {
public:
    GenerativeConvLayer() = default;
    GenerativeConvLayer(std::size_t in_neurons, std::size_t out_neurons, std::size_t kernel_size, std::size_t order);

    std::size_t in_neurons() const noexcept { return in_; }
    std::size_t out_neurons() const noexcept { return out_; }
    std::size_t kernel_size() const noexcept { return kernel_; }
    std::size_t order() const noexcept { return order_; }
    std::size_t padding() const noexcept { return kernel_ / 2; }

    /// Coefficient of in[i]^q at tap r feeding neuron k; q runs 1..order().
    std::size_t weight_index(std::size_t i, std::size_t k, std::size_t r, std::size_t q) const noexcept {
        return ((k * in_ + i) * order_ + (q - 1)) * kernel_ + r;
    }
    double& weight(std::size_t i, std::size_t k, std::size_t r, std::size_t q) {
        return weights_[weight_index(i, k, r, q)];
    }
    double weight(std::size_t i, std::size_t k, std::size_t r, std::size_t q) const {
        return weights_[weight_index(i, k, r, q)];
    }

    /// Storage order is [k][i][q-1][r]; use weight_index() to address it.
    std::span<double> weights() noexcept { return weights_; }
    std::span<const double> weights() const noexcept { return weights_; }
    std::span<double> biases() noexcept { return biases_; }
    std::span<const double> biases() const noexcept { return biases_; }

    /// Uniform in [-b, b], b = sqrt(6 / ((in + out) * K * Q)); zero biases.
    void init_uniform(Rng& rng);

private:
    std::size_t in_ = 0;
    std::size_t out_ = 0;
    std::size_t kernel_ = 0;
    std::size_t order_ = 0;
    std::vector<double> weights_;
    std::vector<double> biases_;
};

/// Zero-padded power planes of a forward input, reused by the backward pass.
/// Plane i * Q + (q - 1) holds in[i]^q shifted right by the padding.
struct GenConvCache {
    std::vector<double> planes;
    std::size_t stride = 0;
};

struct ConvGradients {
    std::vector<double> weights;  ///< same layout as GenerativeConvLayer::weights()
    std::vector<double> biases;
    FeatureMaps input;            ///< empty when the input gradient was not requested
};

/// sum_r sum_q kernel[r * order + (q - 1)] * window[r]^q.
double taylor_window(std::span<const double> window, std::span<const double> kernel, std::size_t order);

FeatureMaps gen_conv_forward(const GenerativeConvLayer& layer, const FeatureMaps& input,
                             GenConvCache* cache = nullptr);
/// Same, writing into `out` so its storage can be reused across calls.
void gen_conv_forward(const GenerativeConvLayer& layer, const FeatureMaps& input, FeatureMaps& out,
                      GenConvCache* cache = nullptr);

/// Exact gradients of gen_conv_forward. `cache` must come from the forward
/// call on the same input when given; otherwise the planes are rebuilt.
ConvGradients gen_conv_backward(const GenerativeConvLayer& layer, const FeatureMaps& input,
                                const FeatureMaps& out_grad, bool want_input_grad = true,
                                const GenConvCache* cache = nullptr);

struct PoolIndices {
    std::size_t input_length = 0;
    std::vector<std::size_t> argmax;  ///< per output element, position within its input row
};

struct PoolResult {
    FeatureMaps maps;
    PoolIndices indices;
};

/// Non-overlapping max over windows of `factor`; ties go to the lowest index.
PoolResult maxpool_forward(const FeatureMaps& input, std::size_t factor);
FeatureMaps maxpool_backward(const PoolIndices& indices, const FeatureMaps& out_grad);

/// Max over the whole temporal axis, one value per neuron.
PoolResult global_pool(const FeatureMaps& input);
FeatureMaps global_pool_backward(const PoolIndices& indices, std::span<const double> grad);

void tanh_forward(std::span<double> values);
/// grad[i] *= 1 - y[i]^2 where y is the tanh output.
void tanh_backward(std::span<const double> activated, std::span<double> grad);

class DenseLayer {
public:
    DenseLayer() = default;
    DenseLayer(std::size_t in, std::size_t out);

    std::size_t in_size() const noexcept { return in_; }
    std::size_t out_size() const noexcept { return out_; }

    double& weight(std::size_t i, std::size_t o) { return weights_[i * out_ + o]; }
    double weight(std::size_t i, std::size_t o) const { return weights_[i * out_ + o]; }
    std::span<double> weights() noexcept { return weights_; }
    std::span<const double> weights() const noexcept { return weights_; }
    std::span<double> biases() noexcept { return biases_; }
    std::span<const double> biases() const noexcept { return biases_; }

    void init_uniform(Rng& rng);

private:
    std::size_t in_ = 0;
    std::size_t out_ = 0;
    std::vector<double> weights_;  ///< [in][out]
    std::vector<double> biases_;
};

struct DenseGradients {
    std::vector<double> weights;
    std::vector<double> biases;
    std::vector<double> input;
};

std::vector<double> dense_forward(const DenseLayer& layer, std::span<const double> input);
DenseGradients dense_backward(const DenseLayer& layer, std::span<const double> input,
                              std::span<const double> out_grad);

}  // namespace sonn
