#pragma once

#include <stdexcept>
#include <string>

namespace matd {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Vector/matrix shapes disagree with the operation's contract.
struct DimensionMismatch : Error {
  using Error::Error;
};

/// A dense solve hit a (numerically) singular system; usually signals a
/// violated precondition such as a non-ergodic chain or rank-deficient features.
struct SingularSystem : Error {
  using Error::Error;
};

/// A stated precondition does not hold (hypothesis violated, window too short,
/// cap exceeded, trajectory not recorded, buffer miss, ...). The message names
/// the precondition.
struct PreconditionViolation : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

}  // namespace matd
