#include "ecgopt/model_builder.hpp"

#include <algorithm>
#include <sstream>

#include "ecgopt/errors.hpp"
#include "ecgopt/search_space.hpp"

namespace ecgopt {

const char* layer_kind_name(LayerKind k) {
    switch (k) {
        case LayerKind::Conv1D: return "conv1d";
        case LayerKind::MaxPool1D: return "max_pool1d";
        case LayerKind::Dropout: return "dropout";
        case LayerKind::Dense: return "dense";
        case LayerKind::ResidualAdd: return "residual_add";
        case LayerKind::ReLU: return "relu";
        case LayerKind::Softmax: return "softmax";
    }
    return "?";
}

namespace {

LayerKind layer_kind_from_name(const std::string& s) {
    for (LayerKind k : {LayerKind::Conv1D, LayerKind::MaxPool1D, LayerKind::Dropout,
                        LayerKind::Dense, LayerKind::ResidualAdd, LayerKind::ReLU,
                        LayerKind::Softmax})
        if (s == layer_kind_name(k)) return k;
    throw DataError("unknown layer kind '" + s + "'");
}

long long layer_param_count(const LayerDesc& d) {
    switch (d.kind) {
        case LayerKind::Conv1D:
            return static_cast<long long>(d.kernel_size) * d.in_channels * d.out_channels +
                   d.out_channels;
        case LayerKind::Dense:
            return static_cast<long long>(d.in_width) * d.out_width + d.out_width;
        case LayerKind::ResidualAdd:
            if (d.projection)
                return static_cast<long long>(d.in_channels) * d.out_channels + d.out_channels;
            return 0;
        default:
            return 0;
    }
}

} // namespace

long long ModelSpec::parameter_count() const {
    long long total = 0;
    for (const auto& l : layers) total += layer_param_count(l);
    return total;
}

int ModelSpec::trainable_layer_count() const {
    int n = 0;
    for (const auto& l : layers) {
        if (l.kind == LayerKind::Conv1D || l.kind == LayerKind::Dense) ++n;
        if (l.kind == LayerKind::ResidualAdd && l.projection) ++n;
    }
    return n;
}

ModelSpec build_model(const HyperParams& h, int input_length, int class_count,
                      const ModelConfig& cfg, const SearchSpace* bounds) {
    if (h.conv_layers < 1 || h.dense_layers < 1)
        throw ConfigError("conv/dense layer counts must be >= 1");
    if (h.drop_rate < 0.0 || h.drop_rate >= 1.0)
        throw ConfigError("drop rate must be in [0, 1), got " + std::to_string(h.drop_rate));
    if (h.learning_rate <= 0.0) throw ConfigError("learning rate must be > 0");
    if (h.adam_decay < 0.0) throw ConfigError("adam decay must be >= 0");
    if (bounds != nullptr && !bounds->contains(h))
        throw ConfigError("hyperparameters fall outside the search-space bounds");
    if (class_count < 2) throw ConfigError("class count must be >= 2");
    if (cfg.kernel_size < 1 || cfg.pool_size < 1 || cfg.base_filters < 1 ||
        cfg.dense_width < 1)
        throw ConfigError("model config values must be >= 1");

    constexpr int kBlocks = 7;

    ModelSpec spec;
    spec.input_length = input_length;
    spec.input_channels = 1;
    spec.class_count = class_count;

    int length = input_length;
    int channels = spec.input_channels;
    for (int block = 0; block < kBlocks; ++block) {
        const long long wanted = static_cast<long long>(cfg.base_filters) << block;
        const int filters = static_cast<int>(std::min<long long>(wanted, cfg.filter_cap));

        int shortcut_channels = channels;
        const int block_start = static_cast<int>(spec.layers.size());
        for (int c = 0; c < h.conv_layers; ++c) {
            LayerDesc conv{};
            conv.kind = LayerKind::Conv1D;
            conv.kernel_size = cfg.kernel_size;
            conv.in_channels = channels;
            conv.out_channels = filters;
            spec.layers.push_back(conv);
            spec.layers.push_back({LayerKind::ReLU});
            channels = filters;
        }
        if (block == 1) {
            LayerDesc res{};
            res.kind = LayerKind::ResidualAdd;
            res.source_layer = block_start;
            res.projection = shortcut_channels != filters;
            if (res.projection) {
                res.kernel_size = 1;
                res.in_channels = shortcut_channels;
                res.out_channels = filters;
            }
            spec.residual_add_index = static_cast<int>(spec.layers.size());
            spec.layers.push_back(res);
        }
        if (length < cfg.pool_size)
            throw ConfigError("input length " + std::to_string(input_length) +
                              " too short: block " + std::to_string(block) +
                              " cannot pool a length-" + std::to_string(length) + " map");
        LayerDesc pool{};
        pool.kind = LayerKind::MaxPool1D;
        pool.pool_size = cfg.pool_size;
        spec.layers.push_back(pool);
        length /= cfg.pool_size;

        LayerDesc drop{};
        drop.kind = LayerKind::Dropout;
        drop.drop_rate = h.drop_rate;
        spec.layers.push_back(drop);
    }

    int width = length * channels;
    for (int d = 0; d < h.dense_layers; ++d) {
        LayerDesc dense{};
        dense.kind = LayerKind::Dense;
        dense.in_width = width;
        dense.out_width = cfg.dense_width;
        spec.layers.push_back(dense);
        spec.layers.push_back({LayerKind::ReLU});
        width = cfg.dense_width;
    }
    LayerDesc head{};
    head.kind = LayerKind::Dense;
    head.in_width = width;
    head.out_width = class_count;
    spec.layers.push_back(head);
    spec.layers.push_back({LayerKind::Softmax});
    return spec;
}

std::vector<std::pair<int, int>> infer_shapes(const ModelSpec& spec) {
    std::vector<std::pair<int, int>> shapes;
    shapes.reserve(spec.layers.size() + 1);
    shapes.emplace_back(spec.input_length, spec.input_channels);
    int length = spec.input_length;
    int channels = spec.input_channels;
    for (const auto& l : spec.layers) {
        switch (l.kind) {
            case LayerKind::Conv1D:
                if (channels != l.in_channels)
                    throw ShapeError("conv1d expects " + std::to_string(l.in_channels) +
                                     " channels, feature map has " + std::to_string(channels));
                channels = l.out_channels;
                break;
            case LayerKind::MaxPool1D:
                if (length < l.pool_size)
                    throw ShapeError("max_pool1d pool " + std::to_string(l.pool_size) +
                                     " exceeds length " + std::to_string(length));
                length /= l.pool_size;
                break;
            case LayerKind::Dense:
                if (length * channels != l.in_width)
                    throw ShapeError("dense expects width " + std::to_string(l.in_width) +
                                     ", feature map flattens to " +
                                     std::to_string(length * channels));
                length = 1;
                channels = l.out_width;
                break;
            case LayerKind::ResidualAdd: {
                const auto& src = shapes[l.source_layer];
                const int src_ch = l.projection ? l.out_channels : src.second;
                if (src.first != length || src_ch != channels)
                    throw ShapeError("residual shortcut shape " + std::to_string(src.first) +
                                     "x" + std::to_string(src_ch) + " does not match block output " +
                                     std::to_string(length) + "x" + std::to_string(channels));
                break;
            }
            case LayerKind::Dropout:
            case LayerKind::ReLU:
            case LayerKind::Softmax:
                break;
        }
        shapes.emplace_back(length, channels);
    }
    return shapes;
}

std::string describe_model(const ModelSpec& spec) {
    const auto shapes = infer_shapes(spec);
    std::ostringstream out;
    out << "layer  kind          output        params\n";
    char line[128];
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        const auto& l = spec.layers[i];
        const auto& s = shapes[i + 1];
        std::string shape = std::to_string(s.first) + "x" + std::to_string(s.second);
        std::snprintf(line, sizeof(line), "%-6zu %-13s %-13s %lld\n", i,
                      layer_kind_name(l.kind), shape.c_str(), layer_param_count(l));
        out << line;
    }
    out << "total parameters: " << spec.parameter_count()
        << " (trainable layers: " << spec.trainable_layer_count() << ")\n";
    return out.str();
}

nlohmann::json to_json(const ModelSpec& spec) {
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& l : spec.layers) {
        nlohmann::json j;
        j["kind"] = layer_kind_name(l.kind);
        switch (l.kind) {
            case LayerKind::Conv1D:
                j["kernel_size"] = l.kernel_size;
                j["in_channels"] = l.in_channels;
                j["out_channels"] = l.out_channels;
                break;
            case LayerKind::MaxPool1D:
                j["pool_size"] = l.pool_size;
                break;
            case LayerKind::Dropout:
                j["drop_rate"] = l.drop_rate;
                break;
            case LayerKind::Dense:
                j["in_width"] = l.in_width;
                j["out_width"] = l.out_width;
                break;
            case LayerKind::ResidualAdd:
                j["source_layer"] = l.source_layer;
                j["projection"] = l.projection;
                if (l.projection) {
                    j["in_channels"] = l.in_channels;
                    j["out_channels"] = l.out_channels;
                }
                break;
            default:
                break;
        }
        layers.push_back(std::move(j));
    }
    return nlohmann::json{{"input_length", spec.input_length},
                          {"input_channels", spec.input_channels},
                          {"class_count", spec.class_count},
                          {"residual_add_index", spec.residual_add_index},
                          {"layers", std::move(layers)}};
}

ModelSpec model_spec_from_json(const nlohmann::json& j) {
    ModelSpec spec;
    spec.input_length = j.at("input_length").get<int>();
    spec.input_channels = j.at("input_channels").get<int>();
    spec.class_count = j.at("class_count").get<int>();
    spec.residual_add_index = j.at("residual_add_index").get<int>();
    for (const auto& lj : j.at("layers")) {
        LayerDesc l{};
        l.kind = layer_kind_from_name(lj.at("kind").get<std::string>());
        switch (l.kind) {
            case LayerKind::Conv1D:
                l.kernel_size = lj.at("kernel_size").get<int>();
                l.in_channels = lj.at("in_channels").get<int>();
                l.out_channels = lj.at("out_channels").get<int>();
                break;
            case LayerKind::MaxPool1D:
                l.pool_size = lj.at("pool_size").get<int>();
                break;
            case LayerKind::Dropout:
                l.drop_rate = lj.at("drop_rate").get<double>();
                break;
            case LayerKind::Dense:
                l.in_width = lj.at("in_width").get<int>();
                l.out_width = lj.at("out_width").get<int>();
                break;
            case LayerKind::ResidualAdd:
                l.source_layer = lj.at("source_layer").get<int>();
                l.projection = lj.at("projection").get<bool>();
                if (l.projection) {
                    l.kernel_size = 1;
                    l.in_channels = lj.at("in_channels").get<int>();
                    l.out_channels = lj.at("out_channels").get<int>();
                }
                break;
            default:
                break;
        }
        spec.layers.push_back(l);
    }
    infer_shapes(spec); // validates consistency
    return spec;
}

nlohmann::json to_json(const HyperParams& h) {
    return nlohmann::json{{"drop_rate", h.drop_rate},
                          {"dense_layers", h.dense_layers},
                          {"conv_layers", h.conv_layers},
                          {"learning_rate", h.learning_rate},
                          {"adam_decay", h.adam_decay}};
}

HyperParams hyper_params_from_json(const nlohmann::json& j) {
    HyperParams h;
    h.drop_rate = j.at("drop_rate").get<double>();
    h.dense_layers = j.at("dense_layers").get<int>();
    h.conv_layers = j.at("conv_layers").get<int>();
    h.learning_rate = j.at("learning_rate").get<double>();
    h.adam_decay = j.at("adam_decay").get<double>();
    return h;
}

} // namespace ecgopt
