#ifndef KERROMIT_ERROR_HPP
#define KERROMIT_ERROR_HPP

#include <stdexcept>
#include <string>

namespace kerromit
{
// Bad or inconsistent user input. Maps to CLI exit code 1.
class ValidationError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// Mutually exclusive / missing configuration fields, unknown keys.
class ConfigError : public ValidationError
{
public:
    using ValidationError::ValidationError;
};

// Anything the numerics could not deliver. Maps to CLI exit code 2.
class NumericalError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

class SingularityError : public NumericalError
{
public:
    using NumericalError::NumericalError;
};

class ConvergenceError : public NumericalError
{
public:
    ConvergenceError(const std::string &what, double last_metric)
        : NumericalError(what), last_metric_(last_metric)
    {
    }
    double last_metric() const noexcept { return last_metric_; }

private:
    double last_metric_;
};

class InstabilityError : public NumericalError
{
public:
    using NumericalError::NumericalError;
};

// Finite-difference stencil straddles a phase jump.
class StepSizeError : public NumericalError
{
public:
    using NumericalError::NumericalError;
};
} // namespace kerromit

#endif
