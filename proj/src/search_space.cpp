#include "ecgopt/search_space.hpp"

#include <algorithm>
#include <cmath>

#include "ecgopt/errors.hpp"

namespace ecgopt {

SearchSpace::SearchSpace(std::vector<Dimension> dims) : dims_(std::move(dims)) {
    if (dims_.size() != 5)
        throw ConfigError("search space must have exactly 5 dimensions, got " +
                          std::to_string(dims_.size()));
    for (std::size_t i = 0; i < dims_.size(); ++i) {
        const auto& d = dims_[i];
        if (!(d.low < d.high))
            throw ConfigError("search dimension '" + d.name + "' needs low < high");
        if (d.kind == DimensionKind::RealLog && d.low <= 0.0)
            throw ConfigError("log-scaled dimension '" + d.name + "' needs low > 0");
        for (std::size_t j = 0; j < i; ++j)
            if (dims_[j].name == d.name)
                throw ConfigError("duplicate search dimension name '" + d.name + "'");
    }
}

SearchSpace SearchSpace::defaults() {
    return SearchSpace({
        {"drop_rate", DimensionKind::RealLog, 1e-2, 1e-1},
        {"dense_layers", DimensionKind::Integer, 1, 6},
        {"conv_layers", DimensionKind::Integer, 1, 6},
        {"learning_rate", DimensionKind::RealLog, 1e-3, 1e-1},
        {"adam_decay", DimensionKind::RealLog, 1e-6, 1e-5},
    });
}

std::vector<double> SearchSpace::to_raw(const HyperParams& h) const {
    return {h.drop_rate, static_cast<double>(h.dense_layers),
            static_cast<double>(h.conv_layers), h.learning_rate, h.adam_decay};
}

HyperParams SearchSpace::from_raw(const std::vector<double>& raw) const {
    HyperParams h;
    h.drop_rate = raw[0];
    h.dense_layers = static_cast<int>(raw[1]);
    h.conv_layers = static_cast<int>(raw[2]);
    h.learning_rate = raw[3];
    h.adam_decay = raw[4];
    return h;
}

std::vector<double> SearchSpace::encode(const HyperParams& h) const {
    const std::vector<double> raw = to_raw(h);
    std::vector<double> unit(dims_.size());
    for (std::size_t i = 0; i < dims_.size(); ++i) {
        const auto& d = dims_[i];
        const double v = raw[i];
        if (v < d.low || v > d.high)
            throw ConfigError("hyperparameter '" + d.name + "' = " + std::to_string(v) +
                              " outside [" + std::to_string(d.low) + ", " +
                              std::to_string(d.high) + "]");
        unit[i] = d.kind == DimensionKind::RealLog
                      ? (std::log(v) - std::log(d.low)) / (std::log(d.high) - std::log(d.low))
                      : (v - d.low) / (d.high - d.low);
    }
    return unit;
}

HyperParams SearchSpace::decode(const std::vector<double>& unit) const {
    if (unit.size() != dims_.size())
        throw ConfigError("unit point has " + std::to_string(unit.size()) +
                          " coordinates, expected " + std::to_string(dims_.size()));
    std::vector<double> raw(dims_.size());
    for (std::size_t i = 0; i < dims_.size(); ++i) {
        const auto& d = dims_[i];
        const double u = std::clamp(unit[i], 0.0, 1.0);
        if (d.kind == DimensionKind::RealLog) {
            raw[i] = std::exp(std::log(d.low) + u * (std::log(d.high) - std::log(d.low)));
            raw[i] = std::clamp(raw[i], d.low, d.high);
        } else {
            const double v = static_cast<double>(std::llround(d.low + u * (d.high - d.low)));
            raw[i] = std::clamp(v, d.low, d.high);
        }
    }
    return from_raw(raw);
}

bool SearchSpace::contains(const HyperParams& h) const {
    const std::vector<double> raw = to_raw(h);
    for (std::size_t i = 0; i < dims_.size(); ++i)
        if (raw[i] < dims_[i].low || raw[i] > dims_[i].high) return false;
    return true;
}

std::vector<std::vector<double>> SearchSpace::sample(int n, Rng& rng) const {
    if (n < 1) throw ConfigError("sample count must be >= 1, got " + std::to_string(n));
    std::vector<std::vector<double>> points(n, std::vector<double>(dims_.size()));
    std::vector<int> strata(n);
    for (std::size_t d = 0; d < dims_.size(); ++d) {
        for (int i = 0; i < n; ++i) strata[i] = i;
        rng.shuffle(strata);
        for (int i = 0; i < n; ++i)
            points[i][d] = (static_cast<double>(strata[i]) + rng.uniform()) / n;
    }
    return points;
}

} // namespace ecgopt
