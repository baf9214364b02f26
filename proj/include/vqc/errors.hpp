#pragma once

#include <stdexcept>
#include <string>

namespace vqc {

/// Requested size exceeds what the simulator supports (qubit count, encoding slots).
struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Angle/parameter/input vectors do not match what a circuit declares.
struct BindingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid run or estimator configuration (ranges, empty datasets, bad splits).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A data file could not be ingested; message carries the offending row/column.
struct IngestError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// NaN/Inf reached the optimizer. Training halts rather than continuing silently.
struct NumericFault : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace vqc
