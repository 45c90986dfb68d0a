#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fuzzreg {

/// Base class for every error raised by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (bad sizes are reported
/// through DimensionMismatch instead).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

/// Symmetric factorization hit a non-positive pivot; the matrix is not
/// positive definite (callers typically fall back to a least-squares path).
class NotPositiveDefinite : public Error {
public:
    using Error::Error;
};

/// A cluster received zero total weight during a prototype update.
class EmptyCluster : public Error {
public:
    EmptyCluster(std::size_t cluster, const std::string& what)
        : Error(what), cluster_(cluster) {}
    std::size_t cluster() const { return cluster_; }

private:
    std::size_t cluster_;
};

/// Fewer data patterns than clusters.
class InsufficientData : public Error {
public:
    using Error::Error;
};

/// Malformed dataset file; carries the 1-based line number when known.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& what, std::size_t line = 0)
        : Error(what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Dataset declares a nominal (non-numeric) attribute, which is unsupported.
class NonNumericAttribute : public Error {
public:
    using Error::Error;
};

class TooFewPatterns : public Error {
public:
    using Error::Error;
};

class LengthMismatch : public Error {
public:
    using Error::Error;
};

class IndexOutOfRange : public Error {
public:
    using Error::Error;
};

/// Friedman F statistic is undefined (denominator reached zero).
class DegenerateStatistic : public Error {
public:
    using Error::Error;
};

/// The sum of squared non-constant coefficients is zero, so its logarithm
/// is undefined.
class DegenerateLssc : public Error {
public:
    using Error::Error;
};

/// Reports being compared do not share the same variant labels.
class LabelMismatch : public Error {
public:
    using Error::Error;
};

/// Experiment configuration is invalid (unknown key, missing field, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace fuzzreg
