#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bbu {

/// Base class for every error raised by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Estimation errors.
struct EmptyGroupError : Error {
    using Error::Error;
};
struct CostOutOfRangeError : Error {
    using Error::Error;
};
struct ZeroFrequencyError : Error {
    using Error::Error;
};

// Bound / planner errors.
struct NonPositiveTError : Error {
    using Error::Error;
};
struct InvalidConfidenceError : Error {
    using Error::Error;
};
struct NonPositiveDeltaError : Error {
    using Error::Error;
};
struct InvalidParamsError : Error {
    using Error::Error;
};

// Measure resolution errors.
struct MissingFieldError : Error {
    MissingFieldError(std::string field_, const std::string& what_)
        : Error("missing field '" + field_ + "': " + what_), field(std::move(field_)) {}
    std::string field;
};

// Ingestion / generation errors.
struct EmptyDatasetError : Error {
    using Error::Error;
};
struct InvalidConfigError : Error {
    using Error::Error;
};
struct IoError : Error {
    using Error::Error;
};

/// Malformed input that cannot be interpreted at all; carries the 1-based line.
struct ParseError : Error {
    ParseError(std::size_t line_, const std::string& what_)
        : Error("line " + std::to_string(line_) + ": " + what_), line(line_) {}
    std::size_t line;
};

/// Structurally readable input that violates the schema; names the bad field.
struct SchemaError : Error {
    SchemaError(std::size_t line_, std::string field_, const std::string& what_)
        : Error("line " + std::to_string(line_) + ": field '" + field_ + "': " + what_),
          line(line_),
          field(std::move(field_)) {}
    std::size_t line;
    std::string field;
};

// Simulation errors.
struct SampleTooLargeError : Error {
    using Error::Error;
};
struct InfeasibleMixError : Error {
    using Error::Error;
};

}  // namespace bbu
