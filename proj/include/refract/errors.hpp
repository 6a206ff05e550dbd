#pragma once

#include <stdexcept>
#include <string>

namespace refract {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid model, parameters, or user input. Maps to CLI exit code 2.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& msg) : Error(msg) {}
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public ValidationError {
public:
    explicit DomainError(const std::string& msg) : ValidationError(msg) {}
};

/// Evaluation at (or too close to) a pole of a rational form.
class PoleError : public DomainError {
public:
    explicit PoleError(const std::string& msg) : DomainError(msg) {}
};

/// A numerical procedure failed to meet its contract. Maps to CLI exit code 3.
class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& msg) : Error(msg) {}
};

/// Near-multiple roots in a partial-fraction construction; the numeric
/// fallback (build_scale_numeric) handles these cases.
class MultipleRootError : public NumericalError {
public:
    explicit MultipleRootError(const std::string& msg) : NumericalError(msg) {}
};

/// Numerical transform inversion did not reach the requested tolerance.
class InversionError : public NumericalError {
public:
    InversionError(const std::string& msg, double achieved)
        : NumericalError(msg), achieved_residual(achieved) {}
    double achieved_residual;
};

/// Adaptive quadrature failed its tolerance.
class IntegrationError : public NumericalError {
public:
    explicit IntegrationError(const std::string& msg) : NumericalError(msg) {}
};

/// An internal cross-check failed; indicates a defect upstream (e.g. a
/// mis-built scale function), not bad user input.
class ConsistencyError : public NumericalError {
public:
    explicit ConsistencyError(const std::string& msg) : NumericalError(msg) {}
};

}  // namespace refract
