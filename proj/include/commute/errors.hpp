#pragma once

#include <stdexcept>
#include <string>

namespace commute {

// CSV cell that cannot be parsed; message names row and column.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Missing mandatory column, empty file, malformed header.
struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Fewer observations than an operation needs.
struct InsufficientDataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Rank-deficient design matrix.
struct SingularFitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Constant input, zero variance, all-isolated weights and the like.
struct DegenerateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Unknown weights spec, malformed flag value.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace commute
