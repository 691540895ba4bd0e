#pragma once

#include <stdexcept>
#include <string>

namespace bgsm {

/// Malformed input: bad shapes, invalid files, inconsistent configuration.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A parameter outside the domain of a density or sampler.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Numerical breakdown during fitting (failed factorization, non-finite state).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bgsm
