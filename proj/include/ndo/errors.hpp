#pragma once

#include <stdexcept>
#include <string>

namespace ndo {

// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad user input: parameter out of range, malformed request. CLI exit code 2.
struct InvalidArgument : Error {
    using Error::Error;
};

// Config file fails schema validation. CLI exit code 2.
struct ValidationError : Error {
    using Error::Error;
};

// Operation not defined for the given parameter regime. CLI exit code 2.
struct UnsupportedParameter : Error {
    using Error::Error;
};

// Adaptive integrator could not proceed; carries the last good time. CLI exit code 3.
struct IntegrationFailure : Error {
    double t_last;
    IntegrationFailure(const std::string& what, double t)
        : Error(what + " (last good time t=" + std::to_string(t) + ")"), t_last(t) {}
};

// Stochastic step became invalid (norm underflow). CLI exit code 3.
struct StepFailure : Error {
    using Error::Error;
};

// Exit codes used by the CLI.
enum ExitCode : int { kExitOk = 0, kExitValidation = 2, kExitNumerical = 3 };

}  // namespace ndo
