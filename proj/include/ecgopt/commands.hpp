#pragma once

#include <optional>
#include <string>

#include "ecgopt/config.hpp"

namespace ecgopt {

// Experiment subcommands. Each acquires a lock on the output directory and
// throws an ecgopt::Error subclass on failure; the CLI maps that to a
// nonzero exit status. Artifact contents depend only on config and seed, so
// reruns are byte-identical.

// Decode/segment/normalize/split the configured dataset into train.csv,
// val.csv, test.csv plus a JSON summary of per-class counts.
void cmd_prepare(const ExperimentConfig& cfg);

// Train one model (the default configuration unless `h` is given), evaluate
// it on the test split and write model.bin, history.csv, metrics.csv,
// confusion.csv and the without-optimisation comparison row.
void cmd_train(const ExperimentConfig& cfg, const std::optional<HyperParams>& h = std::nullopt);

// Run the selected optimiser over the search space with the full-training
// fitness. Emits tune_<method>/trials.jsonl (append-only, one JSON record
// per line, resumable), best.json, the best model and its comparison row.
void cmd_tune(const ExperimentConfig& cfg, const std::string& method);

// Score a saved model on one split; writes metrics and confusion CSVs.
void cmd_evaluate(const ExperimentConfig& cfg, const std::string& model_path,
                  const std::string& split);

// Consolidate per-class metrics, the normalized confusion matrix, best-so-far
// curves and accuracy/loss curves under out/report. Inputs are read-only.
void cmd_report(const ExperimentConfig& cfg);

} // namespace ecgopt
