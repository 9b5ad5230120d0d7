#pragma once

#include <stdexcept>
#include <string>

namespace patchproc {

/// Invalid parameters, configuration or shapes. The CLI maps this to exit code 2.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& msg) : std::invalid_argument(msg) {}
};

/// A numerical procedure failed to converge or to bracket. The CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

/// The ODE integrator could not advance past `time()`.
class IntegrationError : public NumericalError {
public:
    IntegrationError(const std::string& msg, double t) : NumericalError(msg), t_(t) {}
    double time() const noexcept { return t_; }

private:
    double t_;
};

}  // namespace patchproc
