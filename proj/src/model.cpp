#include "sonn/model.hpp"

#include "sonn/errors.hpp"
#include "sonn/kv_config.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace sonn {
namespace {

constexpr int kFormatVersion = 1;

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::size_t parse_count(const std::string& text, const char* what) {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
        v = std::stoull(text, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos == 0 || pos != text.size()) throw FormatError(std::string("bad ") + what + " value '" + text + "'");
    return static_cast<std::size_t>(v);
}

void write_le(std::ostream& out, double v) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    char bytes[8];
    for (char& b : bytes) {
        b = static_cast<char>(bits & 0xFFu);
        bits >>= 8;
    }
    out.write(bytes, 8);
}

double read_le(std::istream& in) {
    unsigned char bytes[8];
    if (!in.read(reinterpret_cast<char*>(bytes), 8)) throw FormatError("model file truncated in weight section");
    std::uint64_t bits = 0;
    for (int i = 7; i >= 0; --i) bits = (bits << 8) | bytes[i];
    return std::bit_cast<double>(bits);
}

}  // namespace

NetworkConfig NetworkConfig::compact(std::size_t order) {
    NetworkConfig cfg;
    cfg.op_layers = {{16, 41, 8, order}, {12, 41, 8, order}, {8, 9, 2, order}};
    return cfg;
}

NetworkConfig NetworkConfig::wide(std::size_t order) {
    NetworkConfig cfg;
    cfg.op_layers = {{32, 41, 8, order}, {24, 41, 8, order}, {16, 9, 2, order}};
    return cfg;
}

void NetworkConfig::set_order(std::size_t order) {
    for (auto& l : op_layers) l.order = order;
}

std::vector<std::size_t> NetworkConfig::stage_lengths() const {
    std::vector<std::size_t> lengths;
    std::size_t m = frame_len;
    for (const auto& l : op_layers) {
        m = l.pool_factor == 0 ? 0 : m / l.pool_factor;
        lengths.push_back(m);
    }
    return lengths;
}

void NetworkConfig::validate() const {
    if (input_channels == 0 || frame_len == 0 || mlp_hidden == 0 || n_classes == 0) {
        throw ArgumentError("network config counts must be positive");
    }
    if (op_layers.empty()) throw ArgumentError("network needs at least one operational layer");
    for (const auto& l : op_layers) {
        if (l.neurons == 0 || l.kernel_size == 0 || l.pool_factor == 0 || l.order == 0) {
            throw ArgumentError("operational layer fields must be positive");
        }
    }
    const auto lengths = stage_lengths();
    for (std::size_t i = 0; i < lengths.size(); ++i) {
        if (lengths[i] == 0) {
            throw ArgumentError("temporal length collapses to zero after operational layer " + std::to_string(i + 1));
        }
    }
}

std::vector<OpLayerSpec> parse_op_layers(const std::string& text, std::size_t default_order) {
    std::vector<OpLayerSpec> layers;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        std::vector<std::size_t> fields;
        std::stringstream fs(item);
        std::string f;
        while (std::getline(fs, f, ':')) fields.push_back(parse_count(trim(f), "op_layers"));
        if (fields.size() != 3 && fields.size() != 4) {
            throw FormatError("op_layers entry '" + item + "' must be neurons:kernel:pool[:order]");
        }
        layers.push_back({fields[0], fields[1], fields[2], fields.size() == 4 ? fields[3] : default_order});
    }
    if (layers.empty()) throw FormatError("op_layers is empty");
    return layers;
}

std::string format_op_layers(const std::vector<OpLayerSpec>& layers) {
    std::string out;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        if (i) out += ',';
        const auto& l = layers[i];
        out += std::to_string(l.neurons) + ':' + std::to_string(l.kernel_size) + ':' + std::to_string(l.pool_factor) +
               ':' + std::to_string(l.order);
    }
    return out;
}

NetworkConfig network_config_from_kv(const KvConfig& cfg) {
    const auto q = static_cast<std::size_t>(cfg.get_uint("q", 1));
    NetworkConfig net = NetworkConfig::compact(q);
    if (auto layers = cfg.get("op_layers")) net.op_layers = parse_op_layers(*layers, q);
    net.input_channels = cfg.get_uint("input_channels", net.input_channels);
    net.frame_len = cfg.get_uint("frame_len", net.frame_len);
    net.mlp_hidden = cfg.get_uint("mlp_hidden", net.mlp_hidden);
    net.n_classes = cfg.get_uint("n_classes", net.n_classes);
    net.validate();
    return net;
}

std::vector<std::span<double>> Model::parameter_blocks() {
    std::vector<std::span<double>> blocks;
    for (auto& c : conv) {
        blocks.push_back(c.weights());
        blocks.push_back(c.biases());
    }
    blocks.push_back(hidden.weights());
    blocks.push_back(hidden.biases());
    blocks.push_back(output.weights());
    blocks.push_back(output.biases());
    return blocks;
}

std::vector<std::span<const double>> Model::parameter_blocks() const {
    std::vector<std::span<const double>> blocks;
    for (const auto& c : conv) {
        blocks.push_back(c.weights());
        blocks.push_back(c.biases());
    }
    blocks.push_back(hidden.weights());
    blocks.push_back(hidden.biases());
    blocks.push_back(output.weights());
    blocks.push_back(output.biases());
    return blocks;
}

std::size_t Model::parameter_count() const {
    std::size_t n = 0;
    for (auto b : parameter_blocks()) n += b.size();
    return n;
}

Model build_model(const NetworkConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    Model model;
    model.config = cfg;
    Rng rng(derive_seed({seed, 0x6d6f64656cull}));
    std::size_t prev = cfg.input_channels;
    for (const auto& l : cfg.op_layers) {
        model.conv.emplace_back(prev, l.neurons, l.kernel_size, l.order);
        model.conv.back().init_uniform(rng);
        prev = l.neurons;
    }
    model.hidden = DenseLayer(prev, cfg.mlp_hidden);
    model.hidden.init_uniform(rng);
    model.output = DenseLayer(cfg.mlp_hidden, cfg.n_classes);
    model.output.init_uniform(rng);
    return model;
}

FeatureMaps frame_to_maps(const Frame& frame) {
    FeatureMaps maps(kFrameChannels, frame.length);
    maps.values = frame.samples;
    return maps;
}

void forward_trace(const Model& model, FeatureMaps input, ForwardTrace& trace) {
    const auto& cfg = model.config;
    trace.stages.resize(model.conv.size());
    FeatureMaps current = std::move(input);
    for (std::size_t l = 0; l < model.conv.size(); ++l) {
        auto& st = trace.stages[l];
        st.input = std::move(current);
        gen_conv_forward(model.conv[l], st.input, st.conv, &st.cache);
        PoolResult pooled = maxpool_forward(st.conv, cfg.op_layers[l].pool_factor);
        tanh_forward(pooled.maps.values);
        st.pool = std::move(pooled.indices);
        current = std::move(pooled.maps);
    }
    trace.last_activation = std::move(current);
    PoolResult g = global_pool(trace.last_activation);
    trace.global = std::move(g.indices);
    trace.pooled = std::move(g.maps.values);

    trace.hidden = dense_forward(model.hidden, trace.pooled);
    tanh_forward(trace.hidden);
    trace.scores = dense_forward(model.output, trace.hidden);
    tanh_forward(trace.scores);
}

std::vector<double> forward(const Model& model, const Frame& frame) {
    if (!frame.normalized) throw ArgumentError("frame must be normalized before classification");
    if (frame.length != model.config.frame_len || model.config.input_channels != kFrameChannels ||
        frame.samples.size() != kFrameChannels * frame.length) {
        throw ArgumentError("frame shape does not match the model (expected 2 x " +
                            std::to_string(model.config.frame_len) + ")");
    }
    // Reused per thread: a fresh trace costs more in page faults than the conv work.
    thread_local ForwardTrace trace;
    forward_trace(model, frame_to_maps(frame), trace);
    return trace.scores;
}

int predict(std::span<const double> scores) {
    if (scores.empty()) throw ArgumentError("cannot predict from an empty score vector");
    return static_cast<int>(std::max_element(scores.begin(), scores.end()) - scores.begin());
}

int predict(const Model& model, const Frame& frame) {
    return predict(forward(model, frame));
}

ModelGradients ModelGradients::zeros_like(const Model& model) {
    ModelGradients g;
    for (auto b : model.parameter_blocks()) g.blocks.emplace_back(b.size(), 0.0);
    return g;
}

void ModelGradients::clear() {
    for (auto& b : blocks) std::fill(b.begin(), b.end(), 0.0);
}

void backward(const Model& model, const ForwardTrace& trace, std::span<const double> score_grad,
              ModelGradients& grads) {
    if (score_grad.size() != trace.scores.size()) throw ArgumentError("score gradient size mismatch");
    const std::size_t n_conv = model.conv.size();
    auto add = [&](std::size_t block, const std::vector<double>& g) {
        auto& dst = grads.blocks.at(block);
        for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
    };

    std::vector<double> d(score_grad.begin(), score_grad.end());
    tanh_backward(trace.scores, d);
    DenseGradients out_g = dense_backward(model.output, trace.hidden, d);
    add(2 * n_conv + 2, out_g.weights);
    add(2 * n_conv + 3, out_g.biases);

    tanh_backward(trace.hidden, out_g.input);
    DenseGradients hid_g = dense_backward(model.hidden, trace.pooled, out_g.input);
    add(2 * n_conv, hid_g.weights);
    add(2 * n_conv + 1, hid_g.biases);

    FeatureMaps dact = global_pool_backward(trace.global, hid_g.input);
    const FeatureMaps* activated = &trace.last_activation;
    for (std::size_t l = n_conv; l-- > 0;) {
        const auto& st = trace.stages[l];
        tanh_backward(activated->values, dact.values);
        FeatureMaps dconv = maxpool_backward(st.pool, dact);
        ConvGradients cg = gen_conv_backward(model.conv[l], st.input, dconv, l > 0, &st.cache);
        add(2 * l, cg.weights);
        add(2 * l + 1, cg.biases);
        if (l > 0) {
            dact = std::move(cg.input);
            activated = &st.input;
        }
    }
}

void save_model(const Model& model, std::ostream& out) {
    const auto& cfg = model.config;
    out << kModelMagic << '\n';
    out << "version = " << kFormatVersion << '\n';
    out << "input_channels = " << cfg.input_channels << '\n';
    out << "frame_len = " << cfg.frame_len << '\n';
    out << "op_layers = " << format_op_layers(cfg.op_layers) << '\n';
    out << "mlp_hidden = " << cfg.mlp_hidden << '\n';
    out << "n_classes = " << cfg.n_classes << '\n';
    for (const auto& [k, v] : model.metadata) out << "meta." << k << " = " << v << '\n';
    out << "weights = " << model.parameter_count() << '\n';
    out << "end\n";

    for (const auto& layer : model.conv) {
        for (std::size_t i = 0; i < layer.in_neurons(); ++i)
            for (std::size_t k = 0; k < layer.out_neurons(); ++k)
                for (std::size_t r = 0; r < layer.kernel_size(); ++r)
                    for (std::size_t q = 1; q <= layer.order(); ++q) write_le(out, layer.weight(i, k, r, q));
        for (double b : layer.biases()) write_le(out, b);
    }
    for (const DenseLayer* d : {&model.hidden, &model.output}) {
        for (double w : d->weights()) write_le(out, w);
        for (double b : d->biases()) write_le(out, b);
    }
    if (!out) throw DataError("failed writing model");
}

Model load_model(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || trim(line) != kModelMagic) throw FormatError("not a SONN1 model file");
    KvConfig header;
    std::map<std::string, std::string> meta;
    bool ended = false;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line == "end") {
            ended = true;
            break;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw FormatError("bad model header line '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.rfind("meta.", 0) == 0) {
            meta[key.substr(5)] = value;
        } else {
            header.set(key, value);
        }
    }
    if (!ended) throw FormatError("model header is not terminated by 'end'");
    if (header.get_int("version", -1) != kFormatVersion) throw FormatError("unsupported model format version");
    if (!header.contains("op_layers")) throw FormatError("model header lacks op_layers");

    NetworkConfig cfg;
    try {
        cfg = network_config_from_kv(header);
    } catch (const ArgumentError& e) {
        throw FormatError(std::string("model header describes an invalid network: ") + e.what());
    }
    Model model = build_model(cfg, 0);
    model.metadata = std::move(meta);
    if (header.get_uint("weights", 0) != model.parameter_count()) {
        throw FormatError("model weight count does not match its configuration");
    }
    for (auto& layer : model.conv) {
        for (std::size_t i = 0; i < layer.in_neurons(); ++i)
            for (std::size_t k = 0; k < layer.out_neurons(); ++k)
                for (std::size_t r = 0; r < layer.kernel_size(); ++r)
                    for (std::size_t q = 1; q <= layer.order(); ++q) layer.weight(i, k, r, q) = read_le(in);
        for (double& b : layer.biases()) b = read_le(in);
    }
    for (DenseLayer* d : {&model.hidden, &model.output}) {
        for (double& w : d->weights()) w = read_le(in);
        for (double& b : d->biases()) b = read_le(in);
    }
    for (auto block : model.parameter_blocks())
        for (double v : block)
            if (!std::isfinite(v)) throw FormatError("model contains non-finite weights");
    return model;
}

void save_model_file(const Model& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write model file: " + path);
    save_model(model, out);
}

Model load_model_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model file: " + path);
    return load_model(in);
}

std::uint64_t conv_layer_macs(std::uint64_t in_neurons, std::uint64_t out_length, std::uint64_t kernel,
                              std::uint64_t order, std::uint64_t out_neurons) {
    return in_neurons * out_length * kernel * order * out_neurons;
}

ComplexityReport complexity(const NetworkConfig& cfg) {
    cfg.validate();
    ComplexityReport rep;
    std::uint64_t prev = cfg.input_channels;
    std::uint64_t length = cfg.frame_len;
    for (std::size_t l = 0; l < cfg.op_layers.size(); ++l) {
        const auto& s = cfg.op_layers[l];
        const std::uint64_t valid = length >= s.kernel_size ? length - s.kernel_size + 1 : 0;
        LayerComplexity lc;
        lc.name = "op" + std::to_string(l + 1);
        lc.params = prev * s.kernel_size * s.order * s.neurons + s.neurons;
        lc.macs = conv_layer_macs(prev, valid, s.kernel_size, s.order, s.neurons);
        rep.layers.push_back(lc);
        prev = s.neurons;
        length = valid / s.pool_factor;
    }
    rep.layers.push_back({"dense1", prev * cfg.mlp_hidden + cfg.mlp_hidden, prev * cfg.mlp_hidden});
    rep.layers.push_back({"dense2", cfg.mlp_hidden * cfg.n_classes + cfg.n_classes,
                          std::uint64_t{cfg.mlp_hidden} * cfg.n_classes});
    for (const auto& l : rep.layers) {
        rep.total_params += l.params;
        rep.total_macs += l.macs;
    }
    return rep;
}

std::uint64_t count_params(const NetworkConfig& cfg) {
    return complexity(cfg).total_params;
}

std::uint64_t count_macs(const NetworkConfig& cfg) {
    return complexity(cfg).total_macs;
}

}  // namespace sonn
