#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ecgopt/bayes_opt.hpp"
#include "ecgopt/ecg_data.hpp"
#include "ecgopt/hyperparams.hpp"
#include "ecgopt/model_builder.hpp"
#include "ecgopt/pso.hpp"
#include "ecgopt/search_space.hpp"

namespace ecgopt {

struct WfdbRecordRef {
    std::string signal_path;
    std::string annotation_path;
    std::string name;
    long long sample_count = 0;
    int channel_count = 2;
    double gain = 200.0;
    double sampling_rate = 360.0;
};

struct DataConfig {
    std::string format = "csv"; // "csv" | "wfdb212"
    std::string csv_path;
    std::vector<WfdbRecordRef> records;
    int window_length = 250;
    std::vector<std::string> classes = {"N", "L", "R", "A", "V"};
    double train_fraction = 0.70;
    double validation_fraction = 0.15;
    double test_fraction = 0.15;
    bool normalize = true;
};

struct TrainConfig {
    int batch_size = 128;
    int max_epochs = 100;
    int patience = 10;
};

// One experiment: dataset, network shape, training protocol, both optimisers
// and the output location. Loaded from a single JSON document; command-line
// flags override individual keys; environment variables are never consulted.
struct ExperimentConfig {
    DataConfig data;
    TrainConfig train;
    ModelConfig model;
    HyperParams default_hyper_params;
    SearchSpace space = SearchSpace::defaults();
    BoConfig bo;
    PsoConfig pso;
    std::string fitness_metric = "val_accuracy"; // or "val_loss"
    std::uint64_t seed = 42;
    std::string out_dir = "out";
    bool parallel_kernels = true;
    int threads = 0; // 0 keeps the OpenMP runtime default

    // Parses and validates; data paths resolve relative to the config file.
    static ExperimentConfig load(const std::string& path);
};

} // namespace ecgopt
