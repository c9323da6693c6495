#pragma once

#include <stdexcept>

namespace moire {

/// Base class for all domain errors thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// 1/theta is not an integer: the commensurate supercell construction fails.
struct IncommensurateTheta : Error {
    using Error::Error;
};

/// Grid domain length does not match the moire period required by the model.
struct GridMismatch : Error {
    using Error::Error;
};

/// Objective or gradient produced NaN/inf where a finite value is required.
struct NonFiniteObjective : Error {
    using Error::Error;
};

/// Adjacent atoms moved past each other: pair arguments would change sign.
struct ChainCrossing : Error {
    using Error::Error;
};

/// Cauchy-Born stiffness is non-positive; the quadratic expansion fails.
struct DegenerateStiffness : Error {
    using Error::Error;
};

/// A pair-potential callback violated its contract (evenness, derivative
/// consistency).
struct PotentialContractError : Error {
    using Error::Error;
};

/// Invalid or incomplete run configuration; the message names the field path.
struct ConfigError : Error {
    using Error::Error;
};

/// Filesystem failure; the message names the path.
struct IoError : Error {
    using Error::Error;
};

} // namespace moire
