#pragma once

#include <stdexcept>
#include <string>

namespace dde {

// Vector/matrix sizes that do not agree with the model or domain.
struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Inconsistent or missing run configuration (e.g. crossover without a model).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EmptyArchiveError : std::runtime_error {
    EmptyArchiveError() : std::runtime_error("archive has no occupied cells") {}
};

// Malformed file contents; the message names the offending field or offset.
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void require_dims(std::size_t got, std::size_t want, const char* what) {
    if (got != want)
        throw DimensionError(std::string(what) + ": expected length " + std::to_string(want) +
                             ", got " + std::to_string(got));
}

}  // namespace dde
