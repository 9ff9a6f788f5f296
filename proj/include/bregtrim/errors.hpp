#ifndef BREGTRIM_ERRORS_HPP
#define BREGTRIM_ERRORS_HPP

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace bregtrim {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A point or codepoint lies outside the divergence domain.
///
/// `row` is set when the offending vector is a row of a dataset,
/// `column` when a single coordinate is to blame.
class DomainError : public Error {
public:
    explicit DomainError(const std::string& what,
                         std::optional<std::size_t> column = std::nullopt,
                         std::optional<std::size_t> row = std::nullopt)
        : Error(what), column_(column), row_(row) {}

    std::optional<std::size_t> column() const { return column_; }
    std::optional<std::size_t> row() const { return row_; }

private:
    std::optional<std::size_t> column_;
    std::optional<std::size_t> row_;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

/// Fewer than k distinct points, empty data, and similar.
class DegenerateInputError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration values (q outside [k, n], bad grids, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

class TooFewPointsError : public Error {
public:
    using Error::Error;
};

class LengthMismatchError : public Error {
public:
    using Error::Error;
};

class RejectionBudgetError : public Error {
public:
    using Error::Error;
};

class UnknownPresetError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace bregtrim

#endif  // BREGTRIM_ERRORS_HPP
