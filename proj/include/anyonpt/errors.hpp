#pragma once

#include <stdexcept>
#include <string>

namespace anyonpt {

// Root of every error raised by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation (pole of the
// potential, E_n >= 0, phi outside [0, pi/2], ...).
struct DomainError : Error {
    using Error::Error;
};

// Caller violated a structural precondition (grid shape, matrix size,
// phi != 0 for the Galilean check, ...).
struct ContractError : Error {
    using Error::Error;
};

// Bound state is not normalizable at the requested drift (|v| >= v_c).
struct DelocalizedError : DomainError {
    using DomainError::DomainError;
};

// Failure of a numerical kernel: eigensolver, ill-conditioned decomposition.
struct NumericalError : Error {
    using Error::Error;
};

// Overflow of a growing solution or matrix exponential.
struct DivergenceError : NumericalError {
    using NumericalError::NumericalError;
};

// Vanishing biorthogonal overlap (exceptional point).
struct SingularityError : NumericalError {
    using NumericalError::NumericalError;
};

// Simulation finished before the quantity of interest was settled.
struct InconclusiveError : NumericalError {
    using NumericalError::NumericalError;
};

// Malformed or inconsistent experiment configuration.
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace anyonpt
