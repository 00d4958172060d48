#pragma once

#include <vector>

#include "ecgopt/errors.hpp"

namespace ecgopt {

// Flat row-major matrix of fixed-width samples plus integer class labels.
struct LabeledSet {
    int width = 0;
    std::vector<double> values; // count x width
    std::vector<int> labels;

    int count() const { return static_cast<int>(labels.size()); }

    const double* row(int i) const {
        return values.data() + static_cast<std::size_t>(i) * width;
    }

    void add_row(const double* v, int label) {
        values.insert(values.end(), v, v + width);
        labels.push_back(label);
    }

    void require_width(int expected) const {
        if (width != expected)
            throw ShapeError("sample width " + std::to_string(width) + " does not match expected " +
                             std::to_string(expected));
    }
};

} // namespace ecgopt
