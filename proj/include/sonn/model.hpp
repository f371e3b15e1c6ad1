#pragma once

// Full classifier: operational layers (generative conv -> max-pool -> tanh),
// a global max-pool, then two tanh dense layers producing one score per class.

#include "sonn/nn.hpp"
#include "sonn/signal.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace sonn {

class KvConfig;

struct OpLayerSpec {
    std::size_t neurons = 0;
    std::size_t kernel_size = 0;
    std::size_t pool_factor = 1;
    std::size_t order = 1;

    bool operator==(const OpLayerSpec&) const = default;
};

struct NetworkConfig {
    std::size_t input_channels = kFrameChannels;
    std::size_t frame_len = kDefaultFrameLength;
    std::vector<OpLayerSpec> op_layers;
    std::size_t mlp_hidden = 16;
    std::size_t n_classes = kSeverityClasses;

    /// (16-12-8)+(16-4) with kernels 41/41/9 and pooling 8/8/2.
    static NetworkConfig compact(std::size_t order);
    /// (32-24-16)+(16-4), same kernels and pooling.
    static NetworkConfig wide(std::size_t order);

    void set_order(std::size_t order);
    /// Temporal length after each operational layer's pooling.
    std::vector<std::size_t> stage_lengths() const;
    void validate() const;

    bool operator==(const NetworkConfig&) const = default;
};

/// "16:41:8, 12:41:8, 8:9:2" (order taken from `default_order`) or with an explicit
/// fourth field per layer.
std::vector<OpLayerSpec> parse_op_layers(const std::string& text, std::size_t default_order);
std::string format_op_layers(const std::vector<OpLayerSpec>& layers);

/// Keys: q, frame_len, input_channels, op_layers, mlp_hidden, n_classes.
NetworkConfig network_config_from_kv(const KvConfig& cfg);

struct Model {
    NetworkConfig config;
    std::vector<GenerativeConvLayer> conv;
    DenseLayer hidden;
    DenseLayer output;
    /// Free-form key/value pairs persisted with the weights.
    std::map<std::string, std::string> metadata;

    /// Every trainable array in serialization order: each conv layer's weights
    /// then biases, the hidden dense weights then biases, the output dense ones.
    std::vector<std::span<double>> parameter_blocks();
    std::vector<std::span<const double>> parameter_blocks() const;
    std::size_t parameter_count() const;
};

Model build_model(const NetworkConfig& cfg, std::uint64_t seed);

/// Intermediate values kept for the backward pass.
struct ForwardTrace {
    struct Stage {
        FeatureMaps input;
        GenConvCache cache;
        FeatureMaps conv;
        PoolIndices pool;
    };
    std::vector<Stage> stages;
    FeatureMaps last_activation;
    PoolIndices global;
    std::vector<double> pooled;
    std::vector<double> hidden;
    std::vector<double> scores;
};

/// Forward pass on raw maps, recording what backward needs.
void forward_trace(const Model& model, FeatureMaps input, ForwardTrace& trace);

/// Class scores in (-1, 1). The frame must be normalized and shaped input_channels x frame_len.
std::vector<double> forward(const Model& model, const Frame& frame);

/// Argmax with ties resolved to the lowest index.
int predict(std::span<const double> scores);
int predict(const Model& model, const Frame& frame);

/// Gradient storage shaped like Model::parameter_blocks().
struct ModelGradients {
    std::vector<std::vector<double>> blocks;

    static ModelGradients zeros_like(const Model& model);
    void clear();
};

/// Adds d(loss)/d(params) for one traced sample, given d(loss)/d(scores).
void backward(const Model& model, const ForwardTrace& trace, std::span<const double> score_grad,
              ModelGradients& grads);

FeatureMaps frame_to_maps(const Frame& frame);

// Persistence. Layout: "SONN1" line, `key = value` header lines ending with
// "end", then little-endian IEEE-754 doubles in parameter_blocks() order, where
// each conv layer's weights are listed i-major, then k, r, q.
inline constexpr const char* kModelMagic = "SONN1";
void save_model(const Model& model, std::ostream& out);
Model load_model(std::istream& in);
void save_model_file(const Model& model, const std::string& path);
Model load_model_file(const std::string& path);

struct LayerComplexity {
    std::string name;
    std::uint64_t params = 0;
    std::uint64_t macs = 0;
};

/// Trainable parameters and multiply-accumulates. Conv MACs count the
/// valid-convolution output length, chained through floor pooling;
/// biases and power evaluation are not counted.
struct ComplexityReport {
    std::vector<LayerComplexity> layers;
    std::uint64_t total_params = 0;
    std::uint64_t total_macs = 0;

    double macs_millions() const noexcept { return static_cast<double>(total_macs) / 1e6; }
};

std::uint64_t conv_layer_macs(std::uint64_t in_neurons, std::uint64_t out_length, std::uint64_t kernel,
                              std::uint64_t order, std::uint64_t out_neurons);
ComplexityReport complexity(const NetworkConfig& cfg);
std::uint64_t count_params(const NetworkConfig& cfg);
std::uint64_t count_macs(const NetworkConfig& cfg);

}  // namespace sonn
