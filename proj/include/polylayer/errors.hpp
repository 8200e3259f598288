#pragma once

#include <stdexcept>
#include <string>

namespace polylayer {

// Bad input: infeasible geometry, out-of-range numerics, malformed config.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An iterative method ran out of iterations before meeting its tolerance.
class NotConverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace polylayer
