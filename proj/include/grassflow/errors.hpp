/// @file errors.hpp
/// @brief Exception types shared by all grassflow modules.
#pragma once

#include <stdexcept>
#include <string>

namespace grassflow {

/// Malformed input: wrong shapes, non-orthonormal frames, bad parameters.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input is well formed but lies outside the domain of the requested function
/// (outside the coordinate chart, outside a barrier's sub-level set, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A finite-difference oracle could not produce a trustworthy answer.
class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A monitor's precondition does not hold on the supplied series.
class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace grassflow
