#pragma once

#include <stdexcept>
#include <string>

namespace hysens {

/// Bad input: inconsistent dimensions, unknown names, malformed configuration.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure could not produce a trustworthy result.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The trajectory touches an event surface tangentially. Grazing contacts are
/// outside the model class handled by the jump conditions.
class GrazingError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace hysens
