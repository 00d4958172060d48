#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ecgopt/dataset.hpp"
#include "ecgopt/network.hpp"

namespace ecgopt {

struct AdamConfig {
    double learning_rate = 1e-3;
    double decay = 0.0; // step size shrinks as lr / (1 + decay * steps taken)
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-7;
};

class AdamOptimizer {
public:
    explicit AdamOptimizer(AdamConfig cfg, long long step_count = 0)
        : cfg_(cfg), step_count_(step_count) {
        if (cfg.learning_rate <= 0.0) throw ConfigError("Adam learning rate must be > 0");
        if (cfg.decay < 0.0) throw ConfigError("Adam decay must be >= 0");
    }

    // One update over all parameter arrays. Throws NumericalError when a
    // gradient is non-finite; train() reports that as a failed trial.
    void step(const std::vector<Param*>& params);

    double effective_rate() const {
        return cfg_.learning_rate / (1.0 + cfg_.decay * static_cast<double>(step_count_));
    }
    long long step_count() const { return step_count_; }
    const AdamConfig& config() const { return cfg_; }

private:
    AdamConfig cfg_;
    long long step_count_;
};

struct EpochStats {
    double train_loss;
    double train_accuracy;
    double val_loss;
    double val_accuracy;
};

struct TrainHistory {
    std::vector<EpochStats> per_epoch;
    int stopped_epoch = 0; // completed epochs == per_epoch.size()
};

struct TrainOptions {
    int max_epochs = 100;
    int patience = 10; // epochs without a validation-loss improvement
    int batch_size = 128;
    AdamConfig adam;
    std::uint64_t seed = 0;
};

struct TrainResult {
    TrainHistory history;
    bool diverged = false;
    int best_epoch = 0; // 1-based epoch whose weights were restored
    double best_val_loss = 0.0;
    double best_val_accuracy = 0.0;
};

// Mini-batch training with early stopping on validation loss; the weights of
// the best epoch are restored before returning. A non-finite loss or gradient
// aborts the run with diverged = true.
TrainResult train(Network& net, const LabeledSet& train_set, const LabeledSet& val_set,
                  const TrainOptions& opts);

// Eval-mode loss and accuracy over a set.
std::pair<double, double> evaluate(Network& net, const LabeledSet& set, int batch_size = 256);

std::vector<int> predict_labels(Network& net, const LabeledSet& set, int batch_size = 256);

// CSV with header epoch,train_loss,train_acc,val_loss,val_acc.
void write_history_csv(const TrainHistory& history, const std::string& path);

} // namespace ecgopt
