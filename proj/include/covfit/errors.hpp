#pragma once

#include <stdexcept>
#include <string>

namespace covfit {

/// Bad caller input: unknown labels, overlapping query sets, out-of-range values.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed file content.
class ParseError : public InputError {
 public:
  using InputError::InputError;
};

/// Dimension or sample-size requirement not met.
class DimensionError : public InputError {
 public:
  using InputError::InputError;
};

/// Matrix violates a model requirement (zero pattern, positive definiteness).
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Factorization or linear-solver breakdown.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace covfit
