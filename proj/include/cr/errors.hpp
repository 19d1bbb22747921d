#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cr {

// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Evaluation at a point outside the admissible region.
class DomainError : public Error {
public:
    using Error::Error;
};

// Non-finite values, failed convergence, singular linear systems.
class NumericalError : public Error {
public:
    using Error::Error;
};

// Singular velocity Hessian; carries the estimated condition number.
class RegularityError : public NumericalError {
public:
    RegularityError(const std::string& what, double condition)
        : NumericalError(what), condition_(condition) {}
    double condition() const { return condition_; }

private:
    double condition_;
};

// A caller broke a precondition (wrong degree, mismatched sizes, open loop).
class ContractError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

// Malformed scenario configuration. Line and column are 1-based, 0 if unknown.
class SchemaError : public Error {
public:
    SchemaError(const std::string& what, int line = 0, int column = 0)
        : Error(line > 0 ? what + " (line " + std::to_string(line) + ", column " +
                               std::to_string(column) + ")"
                         : what),
          line_(line), column_(column) {}
    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

} // namespace cr
