#pragma once

#include <stdexcept>
#include <string>

namespace aniso
{

/// Base class of every error raised by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
    virtual const char *kind() const noexcept { return "Error"; }
};

#define ANISO_DEFINE_ERROR(Name)                                   \
    class Name : public Error                                      \
    {                                                              \
    public:                                                        \
        using Error::Error;                                        \
        const char *kind() const noexcept override { return #Name; } \
    }

ANISO_DEFINE_ERROR(BadExponent);
ANISO_DEFINE_ERROR(EmptyInterval);
ANISO_DEFINE_ERROR(ZeroAnisotropy);
ANISO_DEFINE_ERROR(DegenerateKernel);
ANISO_DEFINE_ERROR(NotDegenerateLine);
ANISO_DEFINE_ERROR(BadParams);
ANISO_DEFINE_ERROR(ZeroProfile);
ANISO_DEFINE_ERROR(EmptyMesh);
ANISO_DEFINE_ERROR(InvalidPolygon);
ANISO_DEFINE_ERROR(InvalidAnisotropy);
ANISO_DEFINE_ERROR(InvalidInput);

#undef ANISO_DEFINE_ERROR

/// Raised when an iterative minimization stops at its iteration cap while
/// still decreasing. Carries the last quotient so callers can report it.
class NonConvergence : public Error
{
public:
    NonConvergence(const std::string &what, double partial_value)
        : Error(what), partial_value_(partial_value)
    {
    }
    const char *kind() const noexcept override { return "NonConvergence"; }
    double partial_value() const noexcept { return partial_value_; }

private:
    double partial_value_;
};

/// A computed frequency fell outside [lambda_min, lambda_max] (with slack).
class SandwichViolation : public Error
{
public:
    SandwichViolation(const std::string &what, double lambda_min, double lambda, double lambda_max)
        : Error(what), lambda_min_(lambda_min), lambda_(lambda), lambda_max_(lambda_max)
    {
    }
    const char *kind() const noexcept override { return "SandwichViolation"; }
    double lambda_min() const noexcept { return lambda_min_; }
    double lambda() const noexcept { return lambda_; }
    double lambda_max() const noexcept { return lambda_max_; }

private:
    double lambda_min_;
    double lambda_;
    double lambda_max_;
};

} // namespace aniso
