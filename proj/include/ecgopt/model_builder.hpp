#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "ecgopt/hyperparams.hpp"

namespace ecgopt {

class SearchSpace;

enum class LayerKind { Conv1D, MaxPool1D, Dropout, Dense, ResidualAdd, ReLU, Softmax };

const char* layer_kind_name(LayerKind k);

// One entry of a model description. Only the fields of the given kind are
// meaningful; the rest stay at their zero values.
struct LayerDesc {
    LayerKind kind;
    int kernel_size = 0; // Conv1D, and the shortcut projection of ResidualAdd
    int in_channels = 0;
    int out_channels = 0;
    int pool_size = 0;       // MaxPool1D
    double drop_rate = 0.0;  // Dropout
    int in_width = 0;        // Dense (flattened length * channels)
    int out_width = 0;       // Dense
    int source_layer = -1;   // ResidualAdd: layer whose input is the shortcut
    bool projection = false; // ResidualAdd: 1-wide conv reconciling channels
};

// Concrete architecture produced from a HyperParams point: seven
// conv/pool/dropout blocks with one residual shortcut, then the dense head.
struct ModelSpec {
    int input_length = 0;
    int input_channels = 1;
    int class_count = 0;
    int residual_add_index = -1;
    std::vector<LayerDesc> layers;

    long long parameter_count() const;
    int trainable_layer_count() const; // conv + dense + shortcut projection
};

// Structural settings the tuning loop never touches.
struct ModelConfig {
    int kernel_size = 5;
    int base_filters = 32; // block b gets min(base_filters << b, filter_cap)
    int filter_cap = 256;
    int pool_size = 2;
    int dense_width = 64;
};

// Translates a hyperparameter point into the fixed block layout:
//   [n conv] pool dropout | [n conv + shortcut add] pool dropout |
//   5 x ([n conv] pool dropout) | d dense | dense(class_count) softmax
// with ReLU after every conv and hidden dense layer. When `bounds` is given,
// h must lie inside it.
ModelSpec build_model(const HyperParams& h, int input_length, int class_count,
                      const ModelConfig& cfg = {}, const SearchSpace* bounds = nullptr);

// Per-layer table (kind, output shape, parameters) plus totals.
std::string describe_model(const ModelSpec& spec);

// Output shape (length, channels) after every layer; index 0 is the input.
std::vector<std::pair<int, int>> infer_shapes(const ModelSpec& spec);

nlohmann::json to_json(const ModelSpec& spec);
ModelSpec model_spec_from_json(const nlohmann::json& j);

nlohmann::json to_json(const HyperParams& h);
HyperParams hyper_params_from_json(const nlohmann::json& j);

} // namespace ecgopt
