#pragma once

#include <stdexcept>
#include <string>

namespace biofilm {

/// Base class for every error raised by the simulator.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed configuration document.
class ParseError : public Error {
public:
    using Error::Error;
};

/// A value violates a documented invariant. The message starts with the
/// dotted field path, e.g. "step.dt: ...".
class ValidationError : public Error {
public:
    ValidationError(std::string field, const std::string& what)
        : Error(field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Pointwise model evaluation produced something that is not a number, or
/// was handed a state outside its domain.
class StateFault : public Error {
public:
    using Error::Error;
};

/// The explicit integrator left its stability region.
class StabilityFault : public Error {
public:
    StabilityFault(double t, const std::string& what)
        : Error("t=" + std::to_string(t) + " hr: " + what), time_(t) {}

    double time() const noexcept { return time_; }

private:
    double time_;
};

class UnknownPreset : public Error {
public:
    using Error::Error;
};

class EmptySeries : public Error {
public:
    using Error::Error;
};

}  // namespace biofilm
