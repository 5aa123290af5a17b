#pragma once

#include <stdexcept>
#include <string>

namespace socdfn {

/// Base for every error raised by the library. The CLI maps each subclass
/// onto a distinct exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not line up (matrix dims, vector lengths, layer chains).
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A file could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed input text; the message carries a line number or byte offset.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Well-formed input whose values violate a domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Invalid run configuration (fold counts, split fractions, hyperparameters).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// An API precondition was broken by the caller (stale cache, unfitted normalizer).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// A persisted model was written by an incompatible format version.
class VersionError : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite loss.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace socdfn
