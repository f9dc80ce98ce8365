#pragma once

#include <stdexcept>
#include <string>

namespace pairtrade {

/// Base for every failure the engine raises on purpose.
///
/// Argument-shape problems (length mismatch, invalid thresholds, bad
/// ranges) are reported with std::invalid_argument instead.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input data is unreadable, unparsable, or fails cleaning.
class DataError : public Error {
public:
    using Error::Error;
};

/// A computation would read data that is not available at decision time.
class PitViolation : public Error {
public:
    using Error::Error;
};

/// Degenerate or singular numerical input (zero variance, singular design).
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Configuration file or command-line problems.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace pairtrade
