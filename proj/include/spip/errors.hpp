#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace spip {

/// Base for every recoverable error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input was malformed or violated a precondition (CLI exit code 1).
class InputError : public Error {
 public:
  using Error::Error;
};

/// A configured resource cap was hit (CLI exit code 2).
class ResourceError : public Error {
 public:
  using Error::Error;
};

class NotContractive : public InputError {
 public:
  using InputError::InputError;
};
class EmptyWindow : public InputError {
 public:
  using InputError::InputError;
};
class InvalidCode : public InputError {
 public:
  using InputError::InputError;
};
class LengthMismatch : public InputError {
 public:
  using InputError::InputError;
};
class NotAcyclic : public InputError {
 public:
  using InputError::InputError;
};
class EmptyHistogram : public InputError {
 public:
  using InputError::InputError;
};

class ParseError : public InputError {
 public:
  ParseError(std::string where, const std::string& what)
      : InputError(where + ": " + what), where_(std::move(where)) {}
  const std::string& where() const { return where_; }

 private:
  std::string where_;
};

class CapExceeded : public ResourceError {
 public:
  using ResourceError::ResourceError;
};
class WindowOverflow : public ResourceError {
 public:
  using ResourceError::ResourceError;
};
class SpacingTooSmall : public ResourceError {
 public:
  using ResourceError::ResourceError;
};

}  // namespace spip
