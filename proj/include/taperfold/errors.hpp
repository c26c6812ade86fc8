#pragma once

#include <stdexcept>
#include <string>

namespace taperfold {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Geometry construction cannot be realized (apex projection outside the
// midline segment, non-positive derived length, unreachable vertex).
class InfeasibleGeometry : public Error {
public:
    using Error::Error;
};

// Triangle inequality violated beyond tolerance.
class DegenerateTriangle : public Error {
public:
    using Error::Error;
};

// Bracketed root solve has no root in the admissible interval.
class NoSolution : public Error {
public:
    using Error::Error;
};

class InvalidRadius : public Error {
public:
    using Error::Error;
};

class InvalidScale : public Error {
public:
    using Error::Error;
};

class EigenFailure : public Error {
public:
    using Error::Error;
};

// Continuation step underflowed the minimum step size. The partial path is
// carried by the result object, not by this exception; this is thrown only
// for unrecoverable setup problems.
class StepCollapse : public Error {
public:
    using Error::Error;
};

class BaselineOutOfDomain : public Error {
public:
    using Error::Error;
};

class NonPositiveBaseline : public Error {
public:
    using Error::Error;
};

class InsufficientData : public Error {
public:
    using Error::Error;
};

class EmptyPath : public Error {
public:
    using Error::Error;
};

// Config text could not be parsed; carries line/column.
class ParseError : public Error {
public:
    ParseError(int line, int column, const std::string& msg)
        : Error("parse error at line " + std::to_string(line) + ", column " +
                std::to_string(column) + ": " + msg),
          line_(line),
          column_(column) {}
    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

// A config value violates an invariant; names the offending key.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& key, const std::string& msg)
        : Error("invalid value for '" + key + "': " + msg), key_(key) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

}  // namespace taperfold
