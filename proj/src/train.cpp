#include "ecgopt/train.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>

#include "ecgopt/kernels.hpp"

namespace ecgopt {

void AdamOptimizer::step(const std::vector<Param*>& params) {
    for (const Param* p : params)
        for (double g : p->grad)
            if (!std::isfinite(g)) throw NumericalError("non-finite gradient in Adam step");

    const double lr_t = effective_rate();
    ++step_count_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_count_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_count_));
    for (Param* p : params)
        kernels::adam_update(p->value.data(), p->grad.data(), p->m.data(), p->v.data(),
                             p->value.size(), lr_t, cfg_.beta1, cfg_.beta2, cfg_.epsilon, bc1, bc2);
}

namespace {

Tensor make_batch(const LabeledSet& set, const std::vector<int>& indices, int first, int count,
                  std::vector<int>& labels) {
    Tensor x(count, set.width, 1);
    labels.resize(count);
    for (int b = 0; b < count; ++b) {
        const int idx = indices[first + b];
        const double* row = set.row(idx);
        std::copy(row, row + set.width, x.values.begin() + static_cast<std::size_t>(b) * set.width);
        labels[b] = set.labels[idx];
    }
    return x;
}

int count_correct(const Tensor& logits, const std::vector<int>& labels) {
    int correct = 0;
    const int k = logits.channels;
    for (int b = 0; b < logits.batch; ++b) {
        const double* z = logits.values.data() + static_cast<std::size_t>(b) * k;
        int best = 0;
        for (int c = 1; c < k; ++c)
            if (z[c] > z[best]) best = c;
        if (best == labels[b]) ++correct;
    }
    return correct;
}

} // namespace

std::pair<double, double> evaluate(Network& net, const LabeledSet& set, int batch_size) {
    set.require_width(net.spec().input_length);
    if (set.count() == 0) throw DataError("cannot evaluate on an empty set");
    double loss_sum = 0.0;
    int correct = 0;
    std::vector<int> indices(set.count());
    std::iota(indices.begin(), indices.end(), 0);
    std::vector<int> labels;
    for (int first = 0; first < set.count(); first += batch_size) {
        const int count = std::min(batch_size, set.count() - first);
        const Tensor x = make_batch(set, indices, first, count, labels);
        const Tensor logits = net.forward(x, false);
        loss_sum += softmax_crossentropy(logits, labels).loss * count;
        correct += count_correct(logits, labels);
    }
    return {loss_sum / set.count(), static_cast<double>(correct) / set.count()};
}

std::vector<int> predict_labels(Network& net, const LabeledSet& set, int batch_size) {
    set.require_width(net.spec().input_length);
    std::vector<int> out;
    out.reserve(set.count());
    std::vector<int> indices(set.count());
    std::iota(indices.begin(), indices.end(), 0);
    std::vector<int> labels;
    for (int first = 0; first < set.count(); first += batch_size) {
        const int count = std::min(batch_size, set.count() - first);
        const Tensor x = make_batch(set, indices, first, count, labels);
        const auto pred = net.predict(x);
        out.insert(out.end(), pred.begin(), pred.end());
    }
    return out;
}

TrainResult train(Network& net, const LabeledSet& train_set, const LabeledSet& val_set,
                  const TrainOptions& opts) {
    if (train_set.count() == 0 || val_set.count() == 0)
        throw DataError("training requires non-empty train and validation sets");
    train_set.require_width(net.spec().input_length);
    val_set.require_width(net.spec().input_length);
    if (opts.max_epochs < 1 || opts.patience < 1 || opts.batch_size < 1)
        throw ConfigError("max_epochs, patience and batch_size must be >= 1");

    Rng shuffle_rng(derive_seed(opts.seed, "shuffle"));
    Rng dropout_rng(derive_seed(opts.seed, "dropout"));
    AdamOptimizer optimizer(opts.adam);
    const auto params = net.params();

    TrainResult result;
    result.best_val_loss = std::numeric_limits<double>::infinity();

    std::vector<std::vector<double>> best_weights;
    std::vector<int> indices(train_set.count());
    std::iota(indices.begin(), indices.end(), 0);
    std::vector<int> labels;
    int epochs_since_best = 0;

    for (int epoch = 1; epoch <= opts.max_epochs && !result.diverged; ++epoch) {
        shuffle_rng.shuffle(indices);
        double loss_sum = 0.0;
        int correct = 0;
        for (int first = 0; first < train_set.count(); first += opts.batch_size) {
            const int count = std::min(opts.batch_size, train_set.count() - first);
            const Tensor x = make_batch(train_set, indices, first, count, labels);
            const Tensor logits = net.forward(x, true, &dropout_rng);
            const SoftmaxCrossEntropy ce = softmax_crossentropy(logits, labels);
            if (!std::isfinite(ce.loss)) {
                result.diverged = true;
                break;
            }
            loss_sum += ce.loss * count;
            correct += count_correct(logits, labels);
            net.backward(ce.logit_grad);
            try {
                optimizer.step(params);
            } catch (const NumericalError&) {
                result.diverged = true;
                break;
            }
        }
        if (result.diverged) break;

        const auto [val_loss, val_acc] = evaluate(net, val_set, opts.batch_size);
        result.history.per_epoch.push_back({loss_sum / train_set.count(),
                                            static_cast<double>(correct) / train_set.count(),
                                            val_loss, val_acc});
        result.history.stopped_epoch = epoch;
        if (!std::isfinite(val_loss)) {
            result.diverged = true;
            break;
        }

        if (val_loss < result.best_val_loss) {
            result.best_val_loss = val_loss;
            result.best_val_accuracy = val_acc;
            result.best_epoch = epoch;
            best_weights = net.weight_snapshot();
            epochs_since_best = 0;
        } else if (++epochs_since_best >= opts.patience) {
            break;
        }
    }

    if (!best_weights.empty()) net.restore_weights(best_weights);
    return result;
}

void write_history_csv(const TrainHistory& history, const std::string& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw DataError("cannot open '" + path + "' for writing");
    f << "epoch,train_loss,train_acc,val_loss,val_acc\n";
    char line[256];
    for (std::size_t i = 0; i < history.per_epoch.size(); ++i) {
        const auto& e = history.per_epoch[i];
        std::snprintf(line, sizeof(line), "%zu,%.12g,%.12g,%.12g,%.12g\n", i + 1, e.train_loss,
                      e.train_accuracy, e.val_loss, e.val_accuracy);
        f << line;
    }
    if (!f) throw DataError("failed writing history file '" + path + "'");
}

} // namespace ecgopt
