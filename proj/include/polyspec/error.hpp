#pragma once

#include <stdexcept>
#include <string>

namespace polyspec {

/// Bad caller input: malformed series, out-of-range lags, reversed bounds.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical step failed on otherwise valid input (singular filter,
/// non-positive variance from quadrature, degenerate ratio).
class ComputationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnsupportedOrderError : public InputError {
public:
    using InputError::InputError;
};

class SingularFilterError : public ComputationError {
public:
    using ComputationError::ComputationError;
};

}  // namespace polyspec
