#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ecgopt/gp.hpp"
#include "ecgopt/hyperparams.hpp"
#include "ecgopt/rng.hpp"
#include "ecgopt/search_space.hpp"

namespace ecgopt {

// One fitness evaluation. `objective` is the validation error (1 - accuracy)
// being minimized. `wall_time_seconds` is informational only and deliberately
// excluded from the persisted log so reruns stay byte-identical.
struct TrialRecord {
    int index = 0;
    HyperParams hyper_params;
    std::vector<double> unit_point;
    double objective = 0.0;
    double val_accuracy = 0.0;
    bool failed = false;
    std::string source; // "default" | "initial_design" | "acquisition" | "pso"
    std::uint64_t seed = 0;
    double wall_time_seconds = 0.0;
    nlohmann::json extra = nlohmann::json::object();
};

nlohmann::json trial_to_json(const TrialRecord& t);
TrialRecord trial_from_json(const nlohmann::json& j);

struct FitnessOutcome {
    double objective = 1.0;
    bool failed = false;
    nlohmann::json extra = nlohmann::json::object();
};

// The expensive objective: train at the decoded point and score it. The seed
// is derived from the run seed and the trial index, so interrupted runs can
// resume without replaying completed trials.
using FitnessFn = std::function<FitnessOutcome(const std::vector<double>& unit_point,
                                               const HyperParams& h, std::uint64_t trial_seed,
                                               int trial_index)>;

using TrialSink = std::function<void(const TrialRecord&)>;

struct BoConfig {
    int budget = 15;            // total fitness evaluations
    int initial_design_size = 5;
    int acquisition_restarts = 8;
    int candidate_count = 2048;
    std::uint64_t seed = 0;
    GpOptions gp;
    // Evaluated as trial 0 when present; the tuning runs seed it with the
    // hand-picked default configuration.
    std::optional<std::vector<double>> seed_point;
};

// Expected improvement for minimization: with s = sqrt(variance) and
// z = (best - mean) / s, EI = (best - mean) Phi(z) + s phi(z); the s -> 0
// limit max(0, best - mean) is used below s = 1e-12. Never negative.
double expected_improvement(double mean, double variance, double best_observed);

// Argmax of EI over the unit cube: a quasi-random candidate sweep plus
// coordinate-wise refinement of the `restarts` best candidates. When EI
// vanishes everywhere the highest-variance candidate is returned instead.
std::vector<double> propose_next(const GpModel& gp, const SearchSpace& space, int restarts,
                                 Rng& rng, int candidate_count = 2048);

struct OptimizeResult {
    TrialRecord best;
    std::vector<TrialRecord> log;
};

// The evaluate/fit/propose loop: an initial design (optional seed point plus
// Latin-hypercube fill), then GP fit and EI maximization until `budget`
// trials exist. Failed evaluations score 1.0 and the loop continues.
// `resume_from` replays an interrupted run's completed trials; `on_trial` is
// called once per newly evaluated trial, in order.
OptimizeResult optimise(const FitnessFn& fitness, const SearchSpace& space, const BoConfig& config,
                        const std::vector<TrialRecord>& resume_from = {},
                        const TrialSink& on_trial = {});

} // namespace ecgopt
