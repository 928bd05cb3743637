#pragma once

#include <stdexcept>
#include <string>

namespace hlent {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid argument values (bad mode index, window site outside the lattice, ...).
struct DomainError : Error {
  using Error::Error;
};

// Dense-path request too large for the configured capacity.
struct CapacityError : Error {
  using Error::Error;
};

// Eigendecomposition or positivity failure; usually signals a bc/omega misconfiguration.
struct NumericalError : Error {
  using Error::Error;
};

// Region does not fit inside the lattice or the configured D window.
struct PlacementError : Error {
  using Error::Error;
};

// Caller broke an operation contract (too few points for a fit, missing inputs, ...).
struct ContractError : Error {
  using Error::Error;
};

// API misuse (transposed spectrum fed to an entropy, Renyi order 1, ...).
struct MisuseError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

}  // namespace hlent
