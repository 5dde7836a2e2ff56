#pragma once

#include <stdexcept>
#include <string>

namespace auctionvi {

// Invalid configuration (parameter combinations that make a problem ill-posed).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A caller violated an operation's stated precondition.
struct PreconditionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Operation not available for this object (e.g. density-free tabulated prior).
struct UnsupportedOperation : std::logic_error {
  using std::logic_error::logic_error;
};

// Numerical breakdown: non-finite values, solver failure.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace auctionvi
