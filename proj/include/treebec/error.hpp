#pragma once

#include <stdexcept>
#include <string>

namespace treebec {

// Base of every library failure. The CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// Inputs outside the documented domain (bad kind, q >= Q, point on a branch cut).
class DomainError : public Error {
public:
    using Error::Error;
};

class CapacityError : public Error {
public:
    using Error::Error;
};

// Dense routine asked to work on a matrix above the configured limit.
class SizeError : public Error {
public:
    using Error::Error;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double residual)
        : Error(what), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

class NoCrossingError : public Error {
public:
    using Error::Error;
};

class NearSingularError : public Error {
public:
    NearSingularError(const std::string& what, double smallest)
        : Error(what), smallest_(smallest) {}
    double smallest_eigenvalue() const { return smallest_; }

private:
    double smallest_;
};

class StalenessError : public Error {
public:
    using Error::Error;
};

// The theory says the requested object does not exist (e.g. a KMS state on a recurrent graph).
class RefusalError : public Error {
public:
    using Error::Error;
};

}  // namespace treebec
