#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ecgopt/bayes_opt.hpp"
#include "ecgopt/search_space.hpp"

namespace ecgopt {

struct PsoConfig {
    int particles = 5;
    int iterations = 3; // evaluation rounds; total evaluations = particles * iterations
    double inertia = 0.729;
    double cognitive = 1.49445;
    double social = 1.49445;
    double velocity_clamp = 0.5; // per coordinate, in unit-cube units
    std::uint64_t seed = 0;
    // Particle 0 starts here when present (the hand-picked default config).
    std::optional<std::vector<double>> seed_point;
};

// Canonical global-best particle swarm over the encoded unit cube. Positions
// are clamped to [0,1]; personal/global bests are reduced after each full
// iteration in particle-index order, so runs are reproducible. `resume_from`
// replays recorded objectives for already-evaluated points without calling
// the fitness again.
OptimizeResult pso_optimise(const FitnessFn& fitness, const SearchSpace& space,
                            const PsoConfig& config,
                            const std::vector<TrialRecord>& resume_from = {},
                            const TrialSink& on_trial = {});

} // namespace ecgopt
