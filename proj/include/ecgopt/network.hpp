#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ecgopt/model_builder.hpp"
#include "ecgopt/rng.hpp"
#include "ecgopt/tensor.hpp"

namespace ecgopt {

// Trainable parameter array with its gradient and Adam moment buffers.
struct Param {
    std::vector<double> value, grad, m, v;

    void resize(std::size_t n) {
        value.assign(n, 0.0);
        grad.assign(n, 0.0);
        m.assign(n, 0.0);
        v.assign(n, 0.0);
    }
};

struct SoftmaxCrossEntropy {
    double loss;
    Tensor logit_grad;
};

// Mean over the batch of -log softmax(logits)[label], max-subtracted for
// stability. The gradient is (softmax - onehot) / batch.
SoftmaxCrossEntropy softmax_crossentropy(const Tensor& logits, const std::vector<int>& labels);

void softmax_inplace(Tensor& logits);

// A compiled ModelSpec: weights, activation caches and the forward/backward
// passes. The only hidden state is what training mutates; instances can move
// freely between threads as long as one thread drives them at a time.
class Network {
public:
    Network(ModelSpec spec, std::uint64_t init_seed);

    const ModelSpec& spec() const { return spec_; }

    // Runs up to the pre-softmax logits, shape (batch, 1, class_count). In
    // training mode dropout draws fresh masks from rng and activations are
    // cached for backward().
    Tensor forward(const Tensor& input, bool training, Rng* dropout_rng = nullptr);

    // Propagates d(loss)/d(logits) from the latest training forward and
    // fills every parameter gradient.
    void backward(const Tensor& logit_grad);

    Tensor probabilities(const Tensor& input);
    std::vector<int> predict(const Tensor& input);

    std::vector<Param*> params();
    std::vector<const Param*> params() const;

    std::vector<std::vector<double>> weight_snapshot() const;
    void restore_weights(const std::vector<std::vector<double>>& snapshot);

    // Keeps the current dropout masks for subsequent training forwards; used
    // by finite-difference checks that need a fixed stochastic pattern.
    void set_freeze_dropout_masks(bool on) { freeze_masks_ = on; }

private:
    struct Runtime {
        Param weight;
        Param bias;
        std::vector<unsigned char> mask; // dropout survivors
        std::vector<int> argmax;         // max-pool routing
    };

    ModelSpec spec_;
    std::vector<std::pair<int, int>> shapes_; // (length, channels) per activation
    std::vector<Runtime> rt_;
    int logit_layers_; // layers executed to produce logits (softmax excluded)
    std::vector<Tensor> acts_;
    std::vector<Tensor> act_grads_;
    bool freeze_masks_ = false;
    bool forward_was_training_ = false;
};

// Versioned binary weight file: header, the architecture as JSON, then the
// parameter arrays in layer order as little-endian 64-bit reals.
void save_model(const Network& net, const std::string& path);
Network load_model(const std::string& path);

} // namespace ecgopt
