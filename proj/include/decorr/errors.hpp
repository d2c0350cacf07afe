#pragma once

#include <stdexcept>
#include <string>

namespace decorr {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad configuration value (learning rate, momentum, window size, grids).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Feature-count or shape mismatch, including d < 2.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Malformed input values (non-finite samples, bad probability vectors).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// The decorrelation matrix left the finite range; carries the learning
/// rate and the step that triggered it.
class DivergenceError : public Error {
public:
    DivergenceError(double eta, long step)
        : Error("decorrelation matrix diverged at step " + std::to_string(step) +
                " (learning rate " + std::to_string(eta) + " too large for the data scale)"),
          eta(eta), step(step) {}
    double eta;
    long step;
};

/// CSV or manifest parsing failure.
class ParseError : public Error {
public:
    using Error::Error;
};

/// No admissible candidate (learning-rate selection, subset selection).
class SelectionError : public Error {
public:
    using Error::Error;
};

/// Labels are all 0 or all 1 where both classes are required.
class SingleClassError : public Error {
public:
    using Error::Error;
};

/// Zero-variance feature or other degenerate statistic.
class DegenerateError : public Error {
public:
    using Error::Error;
};

} // namespace decorr
