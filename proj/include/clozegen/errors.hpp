#pragma once

#include <stdexcept>
#include <string>

namespace clozegen {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inference backend failed (transport, model, malformed reply).
class BackendError : public Error {
 public:
  using Error::Error;
};

/// A caller broke a documented precondition.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// Token sequence longer than the backend accepts.
class LengthError : public Error {
 public:
  using Error::Error;
};

/// Answer span outside its text, empty, or otherwise unusable.
class SpanError : public Error {
 public:
  using Error::Error;
};

/// Input document does not match its schema.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// An answer string could not be located in its context.
class ResolveError : public Error {
 public:
  using Error::Error;
};

/// Invalid or incomplete configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace clozegen
