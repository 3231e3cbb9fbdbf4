#pragma once

#include <stdexcept>
#include <string>

namespace lrxfl {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidInputError : public Error {
public:
    using Error::Error;
};

// Out-of-range concept or class index; message names the offender.
class IndexError : public Error {
public:
    using Error::Error;
};

// Raised when an AND fusion would put f and ~f in one conjunction.
class ContradictionError : public Error {
public:
    ContradictionError(std::string message, int concept_id)
        : Error(std::move(message)), concept_id(concept_id) {}

    int concept_id;
};

// Non-finite training loss.
class DivergenceError : public Error {
public:
    DivergenceError(std::string message, int epoch)
        : Error(std::move(message)), epoch(epoch) {}

    int epoch;
};

class ParseError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// Config validation failure; `field` is the dotted config key.
class SchemaError : public Error {
public:
    SchemaError(std::string field_name, const std::string& message)
        : Error(message), field(std::move(field_name)) {}

    std::string field;
};

}  // namespace lrxfl
