#pragma once

#include <stdexcept>
#include <string>

namespace holemem {

/// Invalid parameters, grids or input data. Maps to CLI exit code 2.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A Gaussian pulse does not fit inside its time grid.
class TruncationError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Numerical failure (divergence, non-convergence). Maps to CLI exit code 3.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Field propagation produced a non-finite value.
class DivergenceError : public NumericalError {
public:
    DivergenceError(const std::string& what, long last_stable_index)
        : NumericalError(what), last_stable_index_(last_stable_index) {}

    /// Index of the last time sample at which every field value was finite.
    long last_stable_index() const noexcept { return last_stable_index_; }

private:
    long last_stable_index_;
};

}  // namespace holemem
