#include "sonn/nn.hpp"

#include "sonn/errors.hpp"
#include "sonn/kernels/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sonn {
namespace {

void build_planes(const GenerativeConvLayer& layer, const FeatureMaps& input, GenConvCache& cache) {
    const std::size_t q_max = layer.order();
    const std::size_t k = layer.kernel_size();
    const std::size_t pad = layer.padding();
    const std::size_t m = input.length;
    cache.stride = m + k - 1;
    cache.planes.assign(input.neurons * q_max * cache.stride, 0.0);
    for (std::size_t i = 0; i < input.neurons; ++i) {
        const auto y = input.row(i);
        double* first = cache.planes.data() + (i * q_max) * cache.stride + pad;
        std::copy(y.begin(), y.end(), first);
        for (std::size_t q = 1; q < q_max; ++q) {
            const double* prev = first + (q - 1) * cache.stride;
            double* cur = first + q * cache.stride;
            for (std::size_t t = 0; t < m; ++t) cur[t] = prev[t] * y[t];
        }
    }
}

void check_input(const GenerativeConvLayer& layer, const FeatureMaps& input) {
    if (input.neurons != layer.in_neurons()) {
        throw ArgumentError("generative conv expects " + std::to_string(layer.in_neurons()) +
                            " input neurons, got " + std::to_string(input.neurons));
    }
    if (input.length == 0) throw ArgumentError("feature maps must have length >= 1");
    if (input.values.size() != input.neurons * input.length) throw ArgumentError("feature map storage mismatch");
}

}  // namespace

GenerativeConvLayer::GenerativeConvLayer(std::size_t in_neurons, std::size_t out_neurons, std::size_t kernel_size,
                                         std::size_t order)
    : in_(in_neurons), out_(out_neurons), kernel_(kernel_size), order_(order) {
    if (in_ == 0 || out_ == 0 || kernel_ == 0 || order_ == 0) {
        throw ArgumentError("generative conv layer dimensions must all be positive");
    }
    weights_.assign(in_ * out_ * kernel_ * order_, 0.0);
    biases_.assign(out_, 0.0);
}

void GenerativeConvLayer::init_uniform(Rng& rng) {
    const double fan = static_cast<double>((in_ + out_) * kernel_ * order_);
    const double bound = std::sqrt(6.0 / fan);
    for (double& w : weights_) w = uniform(rng, -bound, bound);
    std::fill(biases_.begin(), biases_.end(), 0.0);
}

double taylor_window(std::span<const double> window, std::span<const double> kernel, std::size_t order) {
    if (order == 0 || kernel.size() != window.size() * order) {
        throw ArgumentError("taylor window: kernel must be K x Q for a window of K samples");
    }
    double acc = 0.0;
    for (std::size_t r = 0; r < window.size(); ++r) {
        double power = 1.0;
        for (std::size_t q = 0; q < order; ++q) {
            power *= window[r];
            acc += kernel[r * order + q] * power;
        }
    }
    return acc;
}

FeatureMaps gen_conv_forward(const GenerativeConvLayer& layer, const FeatureMaps& input, GenConvCache* cache) {
    FeatureMaps out;
    gen_conv_forward(layer, input, out, cache);
    return out;
}

void gen_conv_forward(const GenerativeConvLayer& layer, const FeatureMaps& input, FeatureMaps& out,
                      GenConvCache* cache) {
    check_input(layer, input);
    GenConvCache local;
    GenConvCache& planes = cache ? *cache : local;
    build_planes(layer, input, planes);

    out.neurons = layer.out_neurons();
    out.length = input.length;
    out.values.resize(out.neurons * out.length);
    for (std::size_t k = 0; k < out.neurons; ++k) {
        std::fill_n(out.values.begin() + static_cast<std::ptrdiff_t>(k * out.length), out.length, layer.biases()[k]);
    }
    kernels::CorrelateProblem p;
    p.input = planes.planes.data();
    p.in_channels = layer.in_neurons() * layer.order();
    p.in_stride = planes.stride;
    p.weights = layer.weights().data();
    p.out_channels = layer.out_neurons();
    p.taps = layer.kernel_size();
    p.output = out.values.data();
    p.out_stride = out.length;
    p.length = out.length;
    kernels::active().correlate(p);
}

ConvGradients gen_conv_backward(const GenerativeConvLayer& layer, const FeatureMaps& input,
                                const FeatureMaps& out_grad, bool want_input_grad, const GenConvCache* cache) {
    check_input(layer, input);
    if (out_grad.neurons != layer.out_neurons() || out_grad.length != input.length ||
        out_grad.values.size() != out_grad.neurons * out_grad.length) {
        throw ArgumentError("generative conv backward: output gradient shape mismatch");
    }
    GenConvCache local;
    if (cache == nullptr || cache->stride != input.length + layer.kernel_size() - 1) {
        build_planes(layer, input, local);
        cache = &local;
    }

    const std::size_t n_out = layer.out_neurons();
    const std::size_t m = input.length;
    const std::size_t taps = layer.kernel_size();
    const std::size_t q_max = layer.order();
    const std::size_t channels = layer.in_neurons() * q_max;

    ConvGradients grads;
    grads.weights.assign(layer.weights().size(), 0.0);
    grads.biases.assign(n_out, 0.0);
    for (std::size_t k = 0; k < n_out; ++k) {
        double s = 0.0;
        for (double g : out_grad.row(k)) s += g;
        grads.biases[k] = s;
    }

    kernels::WeightGradProblem wg;
    wg.input = cache->planes.data();
    wg.in_channels = channels;
    wg.in_stride = cache->stride;
    wg.grad = out_grad.values.data();
    wg.out_channels = n_out;
    wg.grad_stride = m;
    wg.weight_grad = grads.weights.data();
    wg.taps = taps;
    wg.length = m;
    kernels::active().weight_grad(wg);

    if (!want_input_grad) return grads;

    // d planes[c][pad + t] = sum_k sum_r w[k][c][r] g[k][t + pad - r], computed as a
    // correlation of the (K-1)-padded output gradient with the flipped kernels.
    const std::size_t gstride = m + 2 * (taps - 1);
    std::vector<double> padded(n_out * gstride, 0.0);
    for (std::size_t k = 0; k < n_out; ++k) {
        const auto g = out_grad.row(k);
        std::copy(g.begin(), g.end(), padded.begin() + static_cast<std::ptrdiff_t>(k * gstride + taps - 1));
    }
    std::vector<double> flipped(layer.weights().size());
    const auto w = layer.weights();
    for (std::size_t k = 0; k < n_out; ++k)
        for (std::size_t c = 0; c < channels; ++c)
            for (std::size_t r = 0; r < taps; ++r)
                flipped[(c * n_out + k) * taps + (taps - 1 - r)] = w[(k * channels + c) * taps + r];

    std::vector<double> plane_grad(channels * m, 0.0);
    kernels::CorrelateProblem p;
    p.input = padded.data() + layer.padding();
    p.in_channels = n_out;
    p.in_stride = gstride;
    p.weights = flipped.data();
    p.out_channels = channels;
    p.taps = taps;
    p.output = plane_grad.data();
    p.out_stride = m;
    p.length = m;
    kernels::active().correlate(p);

    // Chain through the powers: d(y^q)/dy = q y^(q-1).
    grads.input = FeatureMaps(input.neurons, m);
    for (std::size_t i = 0; i < input.neurons; ++i) {
        const auto y = input.row(i);
        auto dy = grads.input.row(i);
        for (std::size_t t = 0; t < m; ++t) {
            double power = 1.0;
            double acc = 0.0;
            for (std::size_t q = 1; q <= q_max; ++q) {
                acc += static_cast<double>(q) * power * plane_grad[(i * q_max + q - 1) * m + t];
                power *= y[t];
            }
            dy[t] = acc;
        }
    }
    return grads;
}

PoolResult maxpool_forward(const FeatureMaps& input, std::size_t factor) {
    if (factor == 0) throw ArgumentError("pooling factor must be at least 1");
    if (input.length < factor) {
        throw ArgumentError("pooling factor " + std::to_string(factor) + " exceeds map length " +
                            std::to_string(input.length));
    }
    const std::size_t out_len = input.length / factor;
    PoolResult res{FeatureMaps(input.neurons, out_len), {input.length, {}}};
    res.indices.argmax.resize(input.neurons * out_len);
    for (std::size_t n = 0; n < input.neurons; ++n) {
        const auto row = input.row(n);
        for (std::size_t j = 0; j < out_len; ++j) {
            std::size_t best = j * factor;
            for (std::size_t t = best + 1; t < (j + 1) * factor; ++t)
                if (row[t] > row[best]) best = t;
            res.maps.at(n, j) = row[best];
            res.indices.argmax[n * out_len + j] = best;
        }
    }
    return res;
}

FeatureMaps maxpool_backward(const PoolIndices& indices, const FeatureMaps& out_grad) {
    if (indices.argmax.size() != out_grad.neurons * out_grad.length) {
        throw ArgumentError("maxpool backward: index count does not match gradient shape");
    }
    FeatureMaps in_grad(out_grad.neurons, indices.input_length);
    for (std::size_t n = 0; n < out_grad.neurons; ++n)
        for (std::size_t j = 0; j < out_grad.length; ++j)
            in_grad.at(n, indices.argmax[n * out_grad.length + j]) += out_grad.at(n, j);
    return in_grad;
}

PoolResult global_pool(const FeatureMaps& input) {
    if (input.length == 0) throw ArgumentError("global pool needs maps of length >= 1");
    return maxpool_forward(input, input.length);
}

FeatureMaps global_pool_backward(const PoolIndices& indices, std::span<const double> grad) {
    FeatureMaps g(grad.size(), 1);
    std::copy(grad.begin(), grad.end(), g.values.begin());
    return maxpool_backward(indices, g);
}

void tanh_forward(std::span<double> values) {
    for (double& v : values) v = std::tanh(v);
}

void tanh_backward(std::span<const double> activated, std::span<double> grad) {
    if (activated.size() != grad.size()) throw ArgumentError("tanh backward: size mismatch");
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] *= 1.0 - activated[i] * activated[i];
}

DenseLayer::DenseLayer(std::size_t in, std::size_t out) : in_(in), out_(out) {
    if (in_ == 0 || out_ == 0) throw ArgumentError("dense layer sizes must be positive");
    weights_.assign(in_ * out_, 0.0);
    biases_.assign(out_, 0.0);
}

void DenseLayer::init_uniform(Rng& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(in_ + out_));
    for (double& w : weights_) w = uniform(rng, -bound, bound);
    std::fill(biases_.begin(), biases_.end(), 0.0);
}

std::vector<double> dense_forward(const DenseLayer& layer, std::span<const double> input) {
    if (input.size() != layer.in_size()) throw ArgumentError("dense forward: input size mismatch");
    std::vector<double> out(layer.biases().begin(), layer.biases().end());
    for (std::size_t i = 0; i < layer.in_size(); ++i)
        for (std::size_t o = 0; o < layer.out_size(); ++o) out[o] += layer.weight(i, o) * input[i];
    return out;
}

DenseGradients dense_backward(const DenseLayer& layer, std::span<const double> input,
                              std::span<const double> out_grad) {
    if (input.size() != layer.in_size() || out_grad.size() != layer.out_size()) {
        throw ArgumentError("dense backward: shape mismatch");
    }
    DenseGradients g;
    g.weights.resize(layer.weights().size());
    g.biases.assign(out_grad.begin(), out_grad.end());
    g.input.assign(layer.in_size(), 0.0);
    for (std::size_t i = 0; i < layer.in_size(); ++i) {
        for (std::size_t o = 0; o < layer.out_size(); ++o) {
            g.weights[i * layer.out_size() + o] = input[i] * out_grad[o];
            g.input[i] += layer.weight(i, o) * out_grad[o];
        }
    }
    return g;
}

}  // namespace sonn
