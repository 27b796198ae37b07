#pragma once

#include <stdexcept>
#include <string>

namespace admmdet {

// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Shapes of operands disagree.
class DimensionError : public Error {
public:
    using Error::Error;
};

// A value lies outside the set an operation accepts (off-grid symbol, NaN, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

// Penalty or training parameters violate their feasibility constraints.
class ParameterError : public Error {
public:
    using Error::Error;
};

// Cholesky factorization met a non-positive pivot.
class SingularityError : public Error {
public:
    SingularityError(std::size_t pivot, double value)
        : Error("non-positive pivot " + std::to_string(value) + " at index " + std::to_string(pivot)),
          pivot_(pivot) {}

    std::size_t pivot() const noexcept { return pivot_; }

private:
    std::size_t pivot_;
};

// Bad configuration file, model file, or command-line combination.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Training or evaluation produced non-finite numbers.
class NumericsError : public Error {
public:
    using Error::Error;
};

// Filesystem failures; the message names the path.
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace admmdet
