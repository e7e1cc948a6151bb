#pragma once

#include <stdexcept>
#include <string>

namespace cbo {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A numeric parameter violates a precondition (h <= 0, beta <= 0, ...).
struct ParameterError : Error {
    using Error::Error;
};

/// An objective returned a non-finite value.
struct EvaluationError : Error {
    using Error::Error;
};

/// An operation was called in a state it does not support
/// (missing noise record, missing metadata, ...).
struct UsageError : Error {
    using Error::Error;
};

/// Declared objective metadata is inconsistent with the function.
struct MetadataError : Error {
    using Error::Error;
};

/// Invalid experiment configuration; carries the offending field.
struct ConfigError : Error {
    ConfigError(std::string field_name, const std::string& message)
        : Error(field_name + ": " + message), field(std::move(field_name)) {}
    std::string field;
};

}  // namespace cbo
