#pragma once

#include <stdexcept>
#include <string>

namespace rlab {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Evaluation point or parameter lies outside the model's domain.
class DomainError : public Error {
public:
    using Error::Error;
};

// Request beyond what a model can answer (derivative order, dimension).
class CapabilityError : public Error {
public:
    using Error::Error;
};

// Malformed input: bad exponents, inadmissible instances, wrong shapes.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Quadrature or root bracketing failed to reach its target.
class NumericalError : public Error {
public:
    using Error::Error;
};

// Experiment configuration does not match the schema. `path` names the
// offending JSON location, e.g. "checks[3].operation".
class ConfigError : public Error {
public:
    ConfigError(std::string path, const std::string& what)
        : Error(path + ": " + what), path_(std::move(path)) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

}  // namespace rlab
