#pragma once

#include <stdexcept>
#include <string>

namespace betssm {

// Base for every error the library raises. The CLI maps the concrete
// subclasses onto exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A model or distribution parameter lies outside its domain.
class InvalidParameter : public Error {
public:
    using Error::Error;
};

// An argument (time index, observation, quantile level) is out of range.
class DomainError : public Error {
public:
    using Error::Error;
};

// Inconsistent configuration: wrong model variant, bad K, negative lambda.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Malformed or inconsistent input data.
class DataError : public Error {
public:
    using Error::Error;
};

// Optimizer failure, singular information matrix and similar.
class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace betssm
