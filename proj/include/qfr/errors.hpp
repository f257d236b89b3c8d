#pragma once

#include <stdexcept>
#include <string>

namespace qfr {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A required column or field is missing from an input file.
class SchemaError : public Error {
public:
    using Error::Error;
};

/// A cell or token could not be parsed; the message carries the row index.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Input values violate a documented domain restriction.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Vector/matrix dimensions do not agree.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Malformed configuration document.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Internal solver failure (not a status; statuses are reported in SolveResult).
class SolverError : public Error {
public:
    using Error::Error;
};

/// An estimator could not produce a fit (e.g. non-optimal solve status).
class EstimationError : public Error {
public:
    using Error::Error;
};

/// Expectile calibration could not bracket the requested quantile level.
class CalibrationError : public Error {
public:
    using Error::Error;
};

} // namespace qfr
