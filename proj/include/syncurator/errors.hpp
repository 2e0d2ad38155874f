#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace syncurator {

// Base for every recoverable failure raised by the toolkit. Precondition
// violations (wrong processing stage, invalid config values passed directly
// to a kernel) use std::invalid_argument instead.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input bytes (not JSON, truncated payload, wrong types).
class ParseError : public Error {
public:
    using Error::Error;
};

/// Well-formed input that violates a data-model invariant.
class SchemaError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// Raised by gap interpolation when too few samples are valid.
class TooSparse : public Error {
public:
    TooSparse(std::string component, double valid_fraction, double required);

    const std::string& component() const noexcept { return component_; }
    double valid_fraction() const noexcept { return valid_fraction_; }
    double required() const noexcept { return required_; }

private:
    std::string component_;
    double valid_fraction_;
    double required_;
};

/// A channel could not be processed because detections were too sparse.
class CoverageError : public Error {
public:
    using Error::Error;
};

class LengthMismatch : public Error {
public:
    using Error::Error;
};

class InvalidDrop : public Error {
public:
    using Error::Error;
};

class InsufficientPairs : public Error {
public:
    InsufficientPairs(std::string message, std::size_t edited_shortfall,
                      std::size_t identical_shortfall);

    std::size_t edited_shortfall() const noexcept { return edited_shortfall_; }
    std::size_t identical_shortfall() const noexcept { return identical_shortfall_; }

private:
    std::size_t edited_shortfall_;
    std::size_t identical_shortfall_;
};

class UndefinedDirection : public Error {
public:
    using Error::Error;
};

class AllFramesSkipped : public Error {
public:
    using Error::Error;
};

class MissingTextEmbeddings : public Error {
public:
    using Error::Error;
};

class NoFacesDetected : public Error {
public:
    using Error::Error;
};

} // namespace syncurator
