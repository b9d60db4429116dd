#pragma once

#include <stdexcept>
#include <string>

namespace dimer {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid user input or configuration (CLI exit code 2).
class InputError : public Error {
public:
    using Error::Error;
};

/// Numerical breakdown (CLI exit code 4).
class NumericalError : public Error {
public:
    using Error::Error;
};

#define DIMER_DEFINE_ERROR(Name, Base) \
    class Name : public Base {         \
    public:                            \
        using Base::Base;              \
    };

DIMER_DEFINE_ERROR(SingularEvaluation, NumericalError)
DIMER_DEFINE_ERROR(ZeroWavenumber, InputError)
DIMER_DEFINE_ERROR(PoleEvaluation, NumericalError)
DIMER_DEFINE_ERROR(InvalidScale, InputError)
DIMER_DEFINE_ERROR(InvalidParameter, InputError)
DIMER_DEFINE_ERROR(NegativeKSquared, NumericalError)
DIMER_DEFINE_ERROR(OrderingViolated, InputError)
DIMER_DEFINE_ERROR(ZeroMoment, NumericalError)
DIMER_DEFINE_ERROR(DegenerateGeometry, InputError)
DIMER_DEFINE_ERROR(InvalidWave, InputError)
DIMER_DEFINE_ERROR(TooCloseToScatterer, InputError)
DIMER_DEFINE_ERROR(ResolutionTooLow, InputError)
DIMER_DEFINE_ERROR(ClusterAmbiguity, NumericalError)

#undef DIMER_DEFINE_ERROR

/// Raised when 4 - h - 4t <= 0 (CLI exit code 3).
class RegimeViolation : public Error {
public:
    using Error::Error;
};

class SingularSystem : public NumericalError {
public:
    SingularSystem(const std::string& what, double condition_estimate)
        : NumericalError(what + " (condition estimate " + std::to_string(condition_estimate) + ")"),
          condition_estimate_(condition_estimate)
    {
    }
    double condition_estimate() const { return condition_estimate_; }

private:
    double condition_estimate_;
};

class ConfigError : public InputError {
public:
    ConfigError(const std::string& what, int line = 0, std::string field = {})
        : InputError(format(what, line, field)), line_(line), field_(std::move(field))
    {
    }
    int line() const { return line_; }
    const std::string& field() const { return field_; }

private:
    static std::string format(const std::string& what, int line, const std::string& field)
    {
        std::string s = "config";
        if (line > 0) s += ":" + std::to_string(line);
        if (!field.empty()) s += " [" + field + "]";
        return s + ": " + what;
    }
    int line_;
    std::string field_;
};

} // namespace dimer
