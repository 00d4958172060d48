#pragma once

namespace ecgopt {

// One point in the five-dimensional tuning space: dropout rate, number of
// dense layers, number of convolutional layers per block, Adam learning rate
// and Adam learning-rate decay.
struct HyperParams {
    double drop_rate = 0.05;
    int dense_layers = 3;
    int conv_layers = 3;
    double learning_rate = 1e-3;
    double adam_decay = 1e-6;
};

// The hand-picked level-1 configuration every optimisation run starts from:
// three convolutions per block and three dense layers, with library-default
// Adam settings clamped into the tuning ranges.
inline HyperParams default_hyper_params() { return HyperParams{}; }

} // namespace ecgopt
