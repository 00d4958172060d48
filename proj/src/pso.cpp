#include "ecgopt/pso.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "ecgopt/errors.hpp"

namespace ecgopt {

namespace {

bool points_match(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::abs(a[i] - b[i]) > 1e-9) return false;
    return true;
}

} // namespace

OptimizeResult pso_optimise(const FitnessFn& fitness, const SearchSpace& space,
                            const PsoConfig& config, const std::vector<TrialRecord>& resume_from,
                            const TrialSink& on_trial) {
    if (config.particles < 2)
        throw ConfigError("PSO needs at least 2 particles, got " +
                          std::to_string(config.particles));
    if (config.iterations < 1) throw ConfigError("PSO needs at least 1 iteration");
    const int total = config.particles * config.iterations;
    if (static_cast<int>(resume_from.size()) > total)
        throw DataError("resume log has " + std::to_string(resume_from.size()) +
                        " trials, more than the " + std::to_string(total) + " budgeted");

    const std::size_t dims = space.size();
    Rng rng(derive_seed(config.seed, "pso"));

    std::vector<TrialRecord> log;
    log.reserve(total);
    int eval_index = 0;

    // The swarm dynamics are replayed deterministically; recorded objectives
    // substitute for fitness calls on already-completed trials.
    auto evaluate = [&](const std::vector<double>& point, int particle,
                        int iteration) -> double {
        if (eval_index < static_cast<int>(resume_from.size())) {
            const TrialRecord& rec = resume_from[eval_index];
            if (rec.index != eval_index || !points_match(rec.unit_point, point))
                throw DataError("resume log diverges from the replayed swarm at trial " +
                                std::to_string(eval_index));
            log.push_back(rec);
            ++eval_index;
            return rec.objective;
        }
        TrialRecord rec;
        rec.index = eval_index;
        rec.source = "pso";
        rec.unit_point = point;
        rec.hyper_params = space.decode(point);
        rec.seed = derive_seed(config.seed, "trial", static_cast<std::uint64_t>(eval_index));
        rec.extra = {{"particle", particle}, {"iteration", iteration}};

        const auto t0 = std::chrono::steady_clock::now();
        FitnessOutcome outcome;
        try {
            outcome = fitness(point, rec.hyper_params, rec.seed, rec.index);
        } catch (const Error&) {
            outcome.failed = true;
        }
        rec.wall_time_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        rec.failed = outcome.failed || !std::isfinite(outcome.objective);
        rec.objective = rec.failed ? 1.0 : outcome.objective;
        rec.val_accuracy = 1.0 - rec.objective;
        for (auto it = outcome.extra.begin(); it != outcome.extra.end(); ++it)
            rec.extra[it.key()] = it.value();
        if (on_trial) on_trial(rec);
        log.push_back(std::move(rec));
        ++eval_index;
        return log.back().objective;
    };

    std::vector<std::vector<double>> position(config.particles, std::vector<double>(dims));
    std::vector<std::vector<double>> velocity(config.particles, std::vector<double>(dims, 0.0));
    std::vector<std::vector<double>> pbest_point(config.particles);
    std::vector<double> pbest_value(config.particles);
    std::vector<double> objective(config.particles);

    for (int p = 0; p < config.particles; ++p) {
        if (p == 0 && config.seed_point) {
            if (config.seed_point->size() != dims)
                throw ConfigError("seed point dimension does not match the search space");
            position[p] = *config.seed_point;
        } else {
            for (std::size_t d = 0; d < dims; ++d) position[p][d] = rng.uniform();
        }
    }

    for (int p = 0; p < config.particles; ++p) objective[p] = evaluate(position[p], p, 1);
    for (int p = 0; p < config.particles; ++p) {
        pbest_point[p] = position[p];
        pbest_value[p] = objective[p];
    }
    std::vector<double> gbest_point = pbest_point[0];
    double gbest_value = pbest_value[0];
    for (int p = 1; p < config.particles; ++p)
        if (pbest_value[p] < gbest_value) {
            gbest_value = pbest_value[p];
            gbest_point = pbest_point[p];
        }

    for (int iter = 2; iter <= config.iterations; ++iter) {
        for (int p = 0; p < config.particles; ++p) {
            for (std::size_t d = 0; d < dims; ++d) {
                const double r1 = rng.uniform();
                const double r2 = rng.uniform();
                double v = config.inertia * velocity[p][d] +
                           config.cognitive * r1 * (pbest_point[p][d] - position[p][d]) +
                           config.social * r2 * (gbest_point[d] - position[p][d]);
                v = std::clamp(v, -config.velocity_clamp, config.velocity_clamp);
                velocity[p][d] = v;
                position[p][d] = std::clamp(position[p][d] + v, 0.0, 1.0);
            }
        }
        for (int p = 0; p < config.particles; ++p) objective[p] = evaluate(position[p], p, iter);
        for (int p = 0; p < config.particles; ++p) {
            if (objective[p] < pbest_value[p]) {
                pbest_value[p] = objective[p];
                pbest_point[p] = position[p];
            }
        }
        for (int p = 0; p < config.particles; ++p) {
            if (pbest_value[p] < gbest_value) {
                gbest_value = pbest_value[p];
                gbest_point = pbest_point[p];
            }
        }
    }

    OptimizeResult result;
    result.log = std::move(log);
    result.best = result.log.front();
    for (const auto& t : result.log)
        if (t.objective < result.best.objective) result.best = t;
    return result;
}

} // namespace ecgopt
