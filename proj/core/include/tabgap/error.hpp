#pragma once

#include <stdexcept>
#include <string>

namespace tabgap {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input data (CSV schema mismatch, bad cell, duplicate key).
class ParseError : public Error {
public:
    using Error::Error;
};

/// Invalid study configuration (unknown family, empty family, bad bounds).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Filesystem failures and artifact integrity violations.
class IoError : public Error {
public:
    using Error::Error;
};

/// External meta-predictor failed (nonzero exit, timeout, protocol breach).
class PredictorError : public Error {
public:
    using Error::Error;
};

}  // namespace tabgap
