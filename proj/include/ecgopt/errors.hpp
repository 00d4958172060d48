#pragma once

#include <stdexcept>
#include <string>

namespace ecgopt {

// Error taxonomy used across the library. Every throwing path names the
// offending quantity (shape, path, line, ...) in the message.

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Tensor/weight dimensions do not line up.
struct ShapeError : Error {
    using Error::Error;
};

// A user-supplied setting is out of range or inconsistent.
struct ConfigError : Error {
    using Error::Error;
};

// Malformed input data (files, labels, truncated streams).
struct DataError : Error {
    using Error::Error;
};

// An operation was called on an object in the wrong state.
struct StateError : Error {
    using Error::Error;
};

// A numerical routine failed beyond its recovery policy.
struct NumericalError : Error {
    using Error::Error;
};

} // namespace ecgopt
