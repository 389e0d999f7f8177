#pragma once

#include <stdexcept>
#include <string>

namespace vesselkit {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A differential polynomial referenced a derivative order the jet does not carry.
class MissingOrderError : public Error {
public:
    explicit MissingOrderError(int order)
        : Error("beta jet has no value for derivative order " + std::to_string(order)), order_(order) {}
    int order() const noexcept { return order_; }

private:
    int order_;
};

/// Polynomial is not a total x-derivative (exact integration failed).
class NotExactError : public Error {
public:
    using Error::Error;
};

/// Pivot below the floor or tau vanished.
class SingularMatrixError : public Error {
public:
    using Error::Error;
};

/// Condition estimate or mode separation outside the guard band.
class ConditioningError : public Error {
public:
    using Error::Error;
};

class StepSizeError : public Error {
public:
    using Error::Error;
};

class QuadratureError : public Error {
public:
    using Error::Error;
};

/// General evolution coefficients violate m_i^* = (-1)^i m_i.
class InvalidCoefficientsError : public Error {
public:
    using Error::Error;
};

/// Spectral parameter too close to the spectrum of A.
class SpectrumError : public Error {
public:
    using Error::Error;
};

class PoleError : public Error {
public:
    using Error::Error;
};

/// Requested depth/order beyond what the library supports.
class ResourceError : public Error {
public:
    using Error::Error;
};

/// Bad user input (flags, config files, specs).
class ValidationError : public Error {
public:
    using Error::Error;
};

} // namespace vesselkit
