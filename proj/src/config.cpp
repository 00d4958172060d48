#include "ecgopt/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

namespace fs = std::filesystem;

namespace ecgopt {

namespace {

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    return j.at(key).get<T>();
}

std::string resolve(const fs::path& base, const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? path.string() : (base / path).string();
}

void require_exists(const std::string& path, const char* what) {
    if (!fs::exists(path))
        throw ConfigError(std::string(what) + " '" + path + "' does not exist");
}

SearchSpace space_from_json(const nlohmann::json& arr) {
    std::vector<Dimension> dims;
    for (const auto& d : arr) {
        Dimension dim;
        dim.name = d.at("name").get<std::string>();
        const std::string kind = d.at("kind").get<std::string>();
        if (kind == "real_log")
            dim.kind = DimensionKind::RealLog;
        else if (kind == "integer")
            dim.kind = DimensionKind::Integer;
        else
            throw ConfigError("search dimension kind must be real_log or integer, got '" + kind +
                              "'");
        dim.low = d.at("low").get<double>();
        dim.high = d.at("high").get<double>();
        dims.push_back(std::move(dim));
    }
    return SearchSpace(std::move(dims));
}

} // namespace

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file '" + path + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(f);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    const fs::path base = fs::path(path).parent_path();

    ExperimentConfig cfg;
    try {
        cfg.seed = get_or<std::uint64_t>(j, "seed", cfg.seed);
        cfg.out_dir = get_or<std::string>(j, "out_dir", cfg.out_dir);
        cfg.fitness_metric = get_or<std::string>(j, "fitness_metric", cfg.fitness_metric);
        cfg.parallel_kernels = get_or<bool>(j, "parallel_kernels", cfg.parallel_kernels);
        cfg.threads = get_or<int>(j, "threads", cfg.threads);

        if (j.contains("data")) {
            const auto& d = j.at("data");
            cfg.data.format = get_or<std::string>(d, "format", cfg.data.format);
            cfg.data.window_length = get_or<int>(d, "window_length", cfg.data.window_length);
            cfg.data.classes =
                get_or<std::vector<std::string>>(d, "classes", cfg.data.classes);
            cfg.data.normalize = get_or<bool>(d, "normalize", cfg.data.normalize);
            if (d.contains("split")) {
                const auto& s = d.at("split");
                cfg.data.train_fraction = get_or<double>(s, "train", cfg.data.train_fraction);
                cfg.data.validation_fraction =
                    get_or<double>(s, "validation", cfg.data.validation_fraction);
                cfg.data.test_fraction = get_or<double>(s, "test", cfg.data.test_fraction);
            }
            if (d.contains("csv")) cfg.data.csv_path = resolve(base, d.at("csv").get<std::string>());
            if (d.contains("records")) {
                for (const auto& r : d.at("records")) {
                    WfdbRecordRef ref;
                    ref.signal_path = resolve(base, r.at("signal").get<std::string>());
                    ref.annotation_path = resolve(base, r.at("annotations").get<std::string>());
                    ref.name = get_or<std::string>(r, "name", fs::path(ref.signal_path).stem().string());
                    ref.sample_count = r.at("sample_count").get<long long>();
                    ref.channel_count = get_or<int>(r, "channel_count", ref.channel_count);
                    ref.gain = get_or<double>(r, "gain", ref.gain);
                    ref.sampling_rate = get_or<double>(r, "sampling_rate", ref.sampling_rate);
                    cfg.data.records.push_back(std::move(ref));
                }
            }
        }

        if (j.contains("train")) {
            const auto& t = j.at("train");
            cfg.train.batch_size = get_or<int>(t, "batch_size", cfg.train.batch_size);
            cfg.train.max_epochs = get_or<int>(t, "max_epochs", cfg.train.max_epochs);
            cfg.train.patience = get_or<int>(t, "patience", cfg.train.patience);
        }

        if (j.contains("model")) {
            const auto& m = j.at("model");
            cfg.model.kernel_size = get_or<int>(m, "kernel_size", cfg.model.kernel_size);
            cfg.model.base_filters = get_or<int>(m, "base_filters", cfg.model.base_filters);
            cfg.model.filter_cap = get_or<int>(m, "filter_cap", cfg.model.filter_cap);
            cfg.model.pool_size = get_or<int>(m, "pool_size", cfg.model.pool_size);
            cfg.model.dense_width = get_or<int>(m, "dense_width", cfg.model.dense_width);
        }

        if (j.contains("default_hyper_params"))
            cfg.default_hyper_params = hyper_params_from_json(j.at("default_hyper_params"));

        if (j.contains("search_space")) cfg.space = space_from_json(j.at("search_space"));

        if (j.contains("bo")) {
            const auto& b = j.at("bo");
            cfg.bo.budget = get_or<int>(b, "budget", cfg.bo.budget);
            cfg.bo.initial_design_size =
                get_or<int>(b, "initial_design_size", cfg.bo.initial_design_size);
            cfg.bo.acquisition_restarts =
                get_or<int>(b, "acquisition_restarts", cfg.bo.acquisition_restarts);
            cfg.bo.candidate_count = get_or<int>(b, "candidate_count", cfg.bo.candidate_count);
            if (b.contains("gp")) {
                const auto& g = b.at("gp");
                cfg.bo.gp.restarts = get_or<int>(g, "restarts", cfg.bo.gp.restarts);
                cfg.bo.gp.noise_lo = get_or<double>(g, "noise_lo", cfg.bo.gp.noise_lo);
                cfg.bo.gp.noise_hi = get_or<double>(g, "noise_hi", cfg.bo.gp.noise_hi);
                cfg.bo.gp.lengthscale_lo =
                    get_or<double>(g, "lengthscale_lo", cfg.bo.gp.lengthscale_lo);
                cfg.bo.gp.lengthscale_hi =
                    get_or<double>(g, "lengthscale_hi", cfg.bo.gp.lengthscale_hi);
                cfg.bo.gp.signal_lo = get_or<double>(g, "signal_lo", cfg.bo.gp.signal_lo);
                cfg.bo.gp.signal_hi = get_or<double>(g, "signal_hi", cfg.bo.gp.signal_hi);
            }
        }

        if (j.contains("pso")) {
            const auto& p = j.at("pso");
            cfg.pso.particles = get_or<int>(p, "particles", cfg.pso.particles);
            cfg.pso.iterations = get_or<int>(p, "iterations", cfg.pso.iterations);
            cfg.pso.inertia = get_or<double>(p, "inertia", cfg.pso.inertia);
            cfg.pso.cognitive = get_or<double>(p, "cognitive", cfg.pso.cognitive);
            cfg.pso.social = get_or<double>(p, "social", cfg.pso.social);
            cfg.pso.velocity_clamp = get_or<double>(p, "velocity_clamp", cfg.pso.velocity_clamp);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config file '" + path + "': " + e.what());
    }

    if (cfg.data.format != "csv" && cfg.data.format != "wfdb212")
        throw ConfigError("data.format must be csv or wfdb212, got '" + cfg.data.format + "'");
    if (cfg.fitness_metric != "val_accuracy" && cfg.fitness_metric != "val_loss")
        throw ConfigError("fitness_metric must be val_accuracy or val_loss");
    if (std::abs(cfg.data.train_fraction + cfg.data.validation_fraction +
                 cfg.data.test_fraction - 1.0) > 1e-9)
        throw ConfigError("split fractions must sum to 1");
    if (cfg.data.window_length < 1) throw ConfigError("window_length must be >= 1");
    if (cfg.bo.initial_design_size < 2 || cfg.bo.budget < cfg.bo.initial_design_size)
        throw ConfigError("bo requires budget >= initial_design_size >= 2");
    if (cfg.pso.particles < 2 || cfg.pso.iterations < 1)
        throw ConfigError("pso requires particles >= 2 and iterations >= 1");
    ClassSet validate_classes(cfg.data.classes); // throws on duplicates/empties
    if (!cfg.space.contains(cfg.default_hyper_params))
        throw ConfigError("default_hyper_params fall outside the search space");

    if (cfg.data.format == "csv") {
        if (cfg.data.csv_path.empty())
            throw ConfigError("data.format is csv but data.csv is missing");
        require_exists(cfg.data.csv_path, "segment file");
    } else {
        if (cfg.data.records.empty())
            throw ConfigError("data.format is wfdb212 but data.records is empty");
        for (const auto& r : cfg.data.records) {
            require_exists(r.signal_path, "signal file");
            require_exists(r.annotation_path, "annotation file");
        }
    }
    return cfg;
}

} // namespace ecgopt
