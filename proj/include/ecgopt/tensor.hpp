#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "ecgopt/errors.hpp"

namespace ecgopt {

// Batch of 1-D signals, channels-last: value(b, i, c) with b < batch,
// i < length, c < channels. Dense layers treat (length * channels) as one
// flattened width.
struct Tensor {
    int batch = 0;
    int length = 0;
    int channels = 0;
    std::vector<double> values;

    Tensor() = default;
    Tensor(int b, int l, int c)
        : batch(b), length(l), channels(c),
          values(static_cast<std::size_t>(b) * l * c, 0.0) {
        if (b < 1 || l < 1 || c < 1)
            throw ShapeError("tensor dimensions must be >= 1, got batch=" + std::to_string(b) +
                             " length=" + std::to_string(l) + " channels=" + std::to_string(c));
    }

    std::size_t size() const { return values.size(); }

    double& at(int b, int i, int c) {
        return values[(static_cast<std::size_t>(b) * length + i) * channels + c];
    }
    double at(int b, int i, int c) const {
        return values[(static_cast<std::size_t>(b) * length + i) * channels + c];
    }

    bool same_shape(const Tensor& o) const {
        return batch == o.batch && length == o.length && channels == o.channels;
    }

    bool all_finite() const {
        for (double v : values)
            if (!std::isfinite(v)) return false;
        return true;
    }

    void fill(double v) { values.assign(values.size(), v); }
};

} // namespace ecgopt
