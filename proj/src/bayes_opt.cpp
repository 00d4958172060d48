#include "ecgopt/bayes_opt.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "ecgopt/errors.hpp"
#include "ecgopt/model_builder.hpp"

namespace ecgopt {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752;
constexpr double kInvSqrt2Pi = 0.39894228040143268;

double norm_cdf(double z) { return 0.5 * std::erfc(-z * kInvSqrt2); }
double norm_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s;
}

} // namespace

double expected_improvement(double mean, double variance, double best_observed) {
    const double sigma = std::sqrt(std::max(0.0, variance));
    const double gap = best_observed - mean;
    if (sigma < 1e-12) return std::max(0.0, gap);
    const double z = gap / sigma;
    return std::max(0.0, gap * norm_cdf(z) + sigma * norm_pdf(z));
}

std::vector<double> propose_next(const GpModel& gp, const SearchSpace& space, int restarts,
                                 Rng& rng, int candidate_count) {
    if (!gp.fitted()) throw StateError("propose_next needs a fitted GP");
    if (candidate_count < 1) throw ConfigError("candidate count must be >= 1");
    const double best_observed = gp.min_target();

    auto candidates = space.sample(candidate_count, rng);
    struct Scored {
        double ei;
        double variance;
        int index;
    };
    std::vector<Scored> scored;
    scored.reserve(candidates.size());
    for (int i = 0; i < static_cast<int>(candidates.size()); ++i) {
        const GpPosterior p = gp.posterior(candidates[i]);
        scored.push_back({expected_improvement(p.mean, p.variance, best_observed), p.variance, i});
    }

    double top_ei = 0.0;
    for (const auto& s : scored) top_ei = std::max(top_ei, s.ei);
    if (top_ei <= 0.0) {
        // the surrogate sees no improvement anywhere; fall back to exploring
        // the most uncertain candidate
        int best = 0;
        for (int i = 1; i < static_cast<int>(scored.size()); ++i)
            if (scored[i].variance > scored[best].variance) best = i;
        return candidates[scored[best].index];
    }

    std::stable_sort(scored.begin(), scored.end(),
                     [](const Scored& a, const Scored& b) { return a.ei > b.ei; });

    const int starts = std::min<int>(std::max(1, restarts), static_cast<int>(scored.size()));
    std::vector<double> best_point;
    double best_ei = -1.0;
    for (int s = 0; s < starts; ++s) {
        std::vector<double> x = candidates[scored[s].index];
        double ei = scored[s].ei;
        for (double step = 0.1; step >= 1e-3; step *= 0.5) {
            bool improved = true;
            while (improved) {
                improved = false;
                for (std::size_t d = 0; d < x.size(); ++d) {
                    for (double dir : {step, -step}) {
                        const double saved = x[d];
                        x[d] = std::clamp(saved + dir, 0.0, 1.0);
                        if (x[d] == saved) continue;
                        const GpPosterior p = gp.posterior(x);
                        const double cand = expected_improvement(p.mean, p.variance, best_observed);
                        if (cand > ei) {
                            ei = cand;
                            improved = true;
                            break;
                        }
                        x[d] = saved;
                    }
                }
            }
        }
        if (ei > best_ei) {
            best_ei = ei;
            best_point = std::move(x);
        }
    }
    return best_point;
}

nlohmann::json trial_to_json(const TrialRecord& t) {
    nlohmann::json j{{"index", t.index},
                     {"source", t.source},
                     {"unit_point", t.unit_point},
                     {"hyper_params", to_json(t.hyper_params)},
                     {"objective", t.objective},
                     {"val_accuracy", t.val_accuracy},
                     {"failed", t.failed},
                     {"seed", t.seed}};
    for (auto it = t.extra.begin(); it != t.extra.end(); ++it) j[it.key()] = it.value();
    return j;
}

TrialRecord trial_from_json(const nlohmann::json& j) {
    TrialRecord t;
    t.index = j.at("index").get<int>();
    t.source = j.at("source").get<std::string>();
    t.unit_point = j.at("unit_point").get<std::vector<double>>();
    t.hyper_params = hyper_params_from_json(j.at("hyper_params"));
    t.objective = j.at("objective").get<double>();
    t.val_accuracy = j.at("val_accuracy").get<double>();
    t.failed = j.at("failed").get<bool>();
    t.seed = j.at("seed").get<std::uint64_t>();
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& k = it.key();
        if (k != "index" && k != "source" && k != "unit_point" && k != "hyper_params" &&
            k != "objective" && k != "val_accuracy" && k != "failed" && k != "seed")
            t.extra[k] = it.value();
    }
    return t;
}

namespace {

TrialRecord run_trial(const FitnessFn& fitness, const SearchSpace& space,
                      const std::vector<double>& point, int index, const std::string& source,
                      std::uint64_t run_seed, nlohmann::json extra) {
    TrialRecord rec;
    rec.index = index;
    rec.source = source;
    rec.unit_point = point;
    rec.hyper_params = space.decode(point);
    rec.seed = derive_seed(run_seed, "trial", static_cast<std::uint64_t>(index));
    rec.extra = std::move(extra);

    const auto t0 = std::chrono::steady_clock::now();
    FitnessOutcome outcome;
    try {
        outcome = fitness(point, rec.hyper_params, rec.seed, index);
    } catch (const Error&) {
        outcome.failed = true;
    }
    rec.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    rec.failed = outcome.failed || !std::isfinite(outcome.objective);
    rec.objective = rec.failed ? 1.0 : outcome.objective;
    rec.val_accuracy = 1.0 - rec.objective;
    for (auto it = outcome.extra.begin(); it != outcome.extra.end(); ++it)
        rec.extra[it.key()] = it.value();
    return rec;
}

} // namespace

OptimizeResult optimise(const FitnessFn& fitness, const SearchSpace& space, const BoConfig& config,
                        const std::vector<TrialRecord>& resume_from, const TrialSink& on_trial) {
    if (config.initial_design_size < 2)
        throw ConfigError("initial design size must be >= 2, got " +
                          std::to_string(config.initial_design_size));
    if (config.budget < config.initial_design_size)
        throw ConfigError("budget " + std::to_string(config.budget) +
                          " is smaller than the initial design size " +
                          std::to_string(config.initial_design_size));
    if (static_cast<int>(resume_from.size()) > config.budget)
        throw DataError("resume log has " + std::to_string(resume_from.size()) +
                        " trials, more than the budget " + std::to_string(config.budget));
    for (int i = 0; i < static_cast<int>(resume_from.size()); ++i)
        if (resume_from[i].index != i)
            throw DataError("resume log is not densely indexed at position " + std::to_string(i));

    // The whole initial design is derived up front so a resumed run sees the
    // same plan regardless of where the previous one stopped.
    std::vector<std::vector<double>> design;
    std::vector<std::string> design_source;
    if (config.seed_point) {
        if (static_cast<int>(config.seed_point->size()) != static_cast<int>(space.size()))
            throw ConfigError("seed point dimension does not match the search space");
        design.push_back(*config.seed_point);
        design_source.emplace_back("default");
    }
    const int fill = config.initial_design_size - static_cast<int>(design.size());
    if (fill > 0) {
        Rng design_rng(derive_seed(config.seed, "design"));
        for (auto& p : space.sample(fill, design_rng)) {
            design.push_back(std::move(p));
            design_source.emplace_back("initial_design");
        }
    }

    std::vector<TrialRecord> log = resume_from;
    for (int i = static_cast<int>(log.size()); i < config.budget; ++i) {
        std::vector<double> point;
        std::string source;
        nlohmann::json extra = nlohmann::json::object();
        if (i < config.initial_design_size) {
            point = design[i];
            source = design_source[i];
        } else {
            std::vector<std::vector<double>> xs;
            std::vector<double> ys;
            xs.reserve(log.size());
            ys.reserve(log.size());
            for (const auto& t : log) {
                xs.push_back(t.unit_point);
                ys.push_back(t.objective);
            }
            GpOptions gp_opts = config.gp;
            gp_opts.seed = derive_seed(config.seed, "gp_fit", static_cast<std::uint64_t>(i));
            const GpModel gp = GpModel::fit(xs, ys, gp_opts);

            Rng propose_rng(derive_seed(config.seed, "propose", static_cast<std::uint64_t>(i)));
            point = propose_next(gp, space, config.acquisition_restarts, propose_rng,
                                 config.candidate_count);

            // a proposal sitting on an existing observation would make the
            // next Gram matrix singular; explore instead
            double min_d2 = std::numeric_limits<double>::infinity();
            for (const auto& x : xs) min_d2 = std::min(min_d2, squared_distance(point, x));
            if (min_d2 < 1e-18) {
                auto fresh = space.sample(config.candidate_count, propose_rng);
                double best_var = -1.0;
                for (auto& c : fresh) {
                    const double var = gp.posterior(c).variance;
                    if (var > best_var) {
                        best_var = var;
                        point = std::move(c);
                    }
                }
            }

            const GpPosterior p = gp.posterior(point);
            extra["ei"] = expected_improvement(p.mean, p.variance, gp.min_target());
            extra["gp"] = {{"signal_variance", gp.kernel().signal_variance},
                           {"lengthscales", gp.kernel().lengthscales},
                           {"noise_variance", gp.kernel().noise_variance},
                           {"lml", gp.log_marginal_likelihood()}};
            source = "acquisition";
        }

        TrialRecord rec =
            run_trial(fitness, space, point, i, source, config.seed, std::move(extra));
        if (on_trial) on_trial(rec);
        log.push_back(std::move(rec));
    }

    OptimizeResult result;
    result.log = std::move(log);
    result.best = result.log.front();
    for (const auto& t : result.log)
        if (t.objective < result.best.objective) result.best = t;
    return result;
}

} // namespace ecgopt
