#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "ecgopt/commands.hpp"

namespace {

ecgopt::ExperimentConfig load_config(const std::string& config_path,
                                     const std::optional<std::uint64_t>& seed,
                                     const std::string& out_dir) {
    ecgopt::ExperimentConfig cfg = ecgopt::ExperimentConfig::load(config_path);
    if (seed) cfg.seed = *seed;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-level hyperparameter optimisation for a residual 1-D CNN "
                 "ECG beat classifier"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    app.add_option("--config", config_path, "experiment config file (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "override the config seed");
    app.add_option("--out", out_dir, "override the output directory");

    auto* prepare = app.add_subcommand("prepare", "decode, segment, normalize and split the data");

    auto* train = app.add_subcommand("train", "train and evaluate one model");
    std::string hyper_path;
    train->add_option("--hyperparams", hyper_path,
                      "JSON file with drop_rate, dense_layers, conv_layers, learning_rate, "
                      "adam_decay (defaults to the config's default_hyper_params)")
        ->check(CLI::ExistingFile);

    auto* tune = app.add_subcommand("tune", "search the hyperparameter space");
    std::string method;
    tune->add_option("--method", method, "optimiser: bo or pso")
        ->required()
        ->check(CLI::IsMember({"bo", "pso"}));

    auto* evaluate = app.add_subcommand("evaluate", "score a saved model on one split");
    std::string model_path;
    std::string split = "test";
    evaluate->add_option("--model", model_path, "model file (defaults to <out>/model.bin)");
    evaluate->add_option("--split", split, "train, val or test")
        ->check(CLI::IsMember({"train", "val", "test"}));

    auto* report = app.add_subcommand("report", "consolidate metrics and plot data");

    CLI11_PARSE(app, argc, argv);

    try {
        const ecgopt::ExperimentConfig cfg = load_config(config_path, seed, out_dir);
        if (prepare->parsed()) {
            ecgopt::cmd_prepare(cfg);
        } else if (train->parsed()) {
            std::optional<ecgopt::HyperParams> h;
            if (!hyper_path.empty()) {
                std::ifstream f(hyper_path);
                h = ecgopt::hyper_params_from_json(nlohmann::json::parse(f));
            }
            ecgopt::cmd_train(cfg, h);
        } else if (tune->parsed()) {
            ecgopt::cmd_tune(cfg, method);
        } else if (evaluate->parsed()) {
            ecgopt::cmd_evaluate(cfg, model_path, split);
        } else if (report->parsed()) {
            ecgopt::cmd_report(cfg);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
