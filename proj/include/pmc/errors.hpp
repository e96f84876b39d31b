// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace pmc {

/// Input outside the mathematical domain of an operation (bad modulus,
/// infeasible parameters, point outside a chart, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A geometric precondition failed (vector not tangent, minimal surface where
/// H must be non-null, ...).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Caller mixed incompatible objects (different signatures, grids, ...).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical consistency gate tripped (residual above threshold).
class ConsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A file could not be opened or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pmc
