#pragma once

#include <string>
#include <vector>

#include "ecgopt/hyperparams.hpp"
#include "ecgopt/rng.hpp"

namespace ecgopt {

enum class DimensionKind { RealLog, Integer };

struct Dimension {
    std::string name;
    DimensionKind kind;
    double low;
    double high;
};

// The bounded tuning space and its bijection onto the unit hypercube, where
// both optimisers operate. Real dimensions span decades, so they are encoded
// log-uniformly; integer dimensions are relaxed to a continuous coordinate
// and rounded back on decode.
class SearchSpace {
public:
    // Ordered as (drop rate, dense layers, conv layers, learning rate, Adam
    // decay); custom bounds/kinds may be supplied but the five positions keep
    // this meaning.
    explicit SearchSpace(std::vector<Dimension> dims);

    static SearchSpace defaults();

    const std::vector<Dimension>& dimensions() const { return dims_; }
    std::size_t size() const { return dims_.size(); }

    std::vector<double> encode(const HyperParams& h) const;
    HyperParams decode(const std::vector<double>& unit) const;

    bool contains(const HyperParams& h) const;

    // n quasi-uniform unit points, Latin-hypercube stratified per dimension.
    std::vector<std::vector<double>> sample(int n, Rng& rng) const;

private:
    std::vector<Dimension> dims_;

    std::vector<double> to_raw(const HyperParams& h) const;
    HyperParams from_raw(const std::vector<double>& raw) const;
};

} // namespace ecgopt
