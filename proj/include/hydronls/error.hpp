#pragma once

#include <stdexcept>
#include <string>

namespace hydronls {

/// Bad input: violated precondition, malformed config, inconsistent parameters.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure (shooting, bracketing, integration) did not produce a result.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hydronls
