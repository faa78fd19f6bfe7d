#pragma once

#include <stdexcept>
#include <string>

namespace relaysim {

/// Thrown when an iterative numerical routine fails to converge within its
/// iteration budget. Carries the best estimate computed before giving up so
/// callers can decide whether the partial result is still usable.
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, double partial)
        : std::runtime_error(what), partial_estimate(partial) {}

    double partial_estimate;
};

/// Thrown when a configuration file or programmatic configuration is invalid.
/// `field` names the offending entry so CLI diagnostics can point at it.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& field_name, const std::string& what)
        : std::runtime_error(field_name + ": " + what), field(field_name) {}

    std::string field;
};

} // namespace relaysim
