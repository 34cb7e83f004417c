#pragma once

#include <stdexcept>
#include <string>

namespace dynalay {

/// Bad shapes, out-of-range indices, empty inputs.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// NaN/Inf, divergence of an iterative solve, non-finite loss.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A fixed-point layer was used without a contraction certificate below 1.
class CertificationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed checkpoint, config or CSV file.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace dynalay
