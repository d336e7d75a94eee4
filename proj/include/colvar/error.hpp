#pragma once

#include <stdexcept>
#include <string>

namespace colvar {

// Base for everything the library throws on purpose. Callers that only care
// about "did it work" catch this; the subclasses exist for tests and for the
// CLI's exit-code mapping.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class GridMismatch : public Error { using Error::Error; };
class DomainError : public Error { using Error::Error; };
class InvalidArgument : public Error { using Error::Error; };
class NonFinite : public Error { using Error::Error; };
class Unresolved : public Error { using Error::Error; };
class Degenerate : public Error { using Error::Error; };
class CrossCheckFailure : public Error { using Error::Error; };
class InvariantViolation : public Error { using Error::Error; };
class PreconditionViolated : public Error { using Error::Error; };
class NonMonotone : public Error { using Error::Error; };
class IntegrationFailure : public Error { using Error::Error; };
class ParseError : public Error { using Error::Error; };
class ConfigError : public Error { using Error::Error; };
class IoError : public Error { using Error::Error; };

}  // namespace colvar
