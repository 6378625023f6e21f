#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace woodnet {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Incompatible tensor extents.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Value outside an operation's mathematical domain (ln of <= 0, NaN input).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Operation called in the wrong lifecycle state (backward before forward).
class StateError : public Error {
 public:
  using Error::Error;
};

// Invalid hyperparameter or option combination.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Bad caller-supplied data (labels out of range, boxes off-image, ...).
class InputError : public Error {
 public:
  using Error::Error;
};

// Malformed file contents. Carries the byte offset at which parsing failed.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace woodnet
