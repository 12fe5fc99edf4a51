#pragma once

#include <stdexcept>
#include <string>

namespace fbound {

// Base class for all solver-level failures. CLI maps these to exit code 1,
// InvalidParams to exit code 2.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class InvalidParams : public Error {
public:
    explicit InvalidParams(const std::string& msg) : Error(msg) {}
};

// Argument outside the mathematically supported domain (e.g. psi(x<0),
// put asymptotics past its validity horizon).
class DomainError : public Error {
public:
    explicit DomainError(const std::string& msg) : Error(msg) {}
};

// Volatility model evaluated at a point where it is singular
// (Frey-Stremme denominator non-positive).
class SingularVolatilityError : public Error {
public:
    explicit SingularVolatilityError(const std::string& msg) : Error(msg) {}
};

// Non-finite value or singular linear system inside a numerical kernel.
class NumericError : public Error {
public:
    explicit NumericError(const std::string& msg) : Error(msg) {}
};

// Fixed-point / Newton iteration failed to reach tolerance within its cap.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& msg, double residual)
        : Error(msg), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

// A marching scheme produced values violating its qualitative guarantees
// (negative Gamma field, per-level boundary blow-up).
class SchemeFailureError : public Error {
public:
    explicit SchemeFailureError(const std::string& msg) : Error(msg) {}
};

}  // namespace fbound
