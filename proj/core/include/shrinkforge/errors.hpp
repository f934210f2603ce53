#pragma once

#include <stdexcept>
#include <string>

namespace shrinkforge {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration: counts that do not add up, out-of-range knobs,
/// unknown names.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, long row, long column)
        : Error(what + " (row " + std::to_string(row) + ", column " + std::to_string(column) + ")"),
          row_(row), column_(column) {}

    long row() const noexcept { return row_; }
    long column() const noexcept { return column_; }

private:
    long row_;
    long column_;
};

class FactorizationError : public Error {
public:
    using Error::Error;
};

/// An excluded coordinate carries a nonzero coefficient.
class ConstraintViolation : public Error {
public:
    using Error::Error;
};

/// An operation was handed an input outside its contract, e.g. a
/// folded-concave penalty routed to the convex solver.
class ContractError : public Error {
public:
    using Error::Error;
};

class DivergenceError : public Error {
public:
    using Error::Error;
};

class RankError : public Error {
public:
    using Error::Error;
};

/// The method cannot run at this (n, p), e.g. LAD-type fits with n <= p.
class CapabilityError : public Error {
public:
    using Error::Error;
};

class DegenerateGridError : public Error {
public:
    using Error::Error;
};

}  // namespace shrinkforge
