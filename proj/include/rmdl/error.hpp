#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace rmdl {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Incompatible tensor or layer shapes.
struct ShapeError : Error {
  using Error::Error;
};

// Argument outside an operation's domain (division by zero, empty input, bad range).
struct DomainError : Error {
  using Error::Error;
};

// Malformed text input. `line` is 1-based; 0 when not line-oriented.
struct ParseError : Error {
  ParseError(const std::string& what, std::size_t line)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line(line) {}
  std::size_t line;
};

// Malformed binary container: bad magic, unsupported version, truncated payload.
struct FormatError : Error {
  using Error::Error;
};

struct ChecksumError : FormatError {
  using FormatError::FormatError;
};

// A parameter update was attempted with NaN or infinite gradients.
struct NonFiniteGradient : Error {
  using Error::Error;
};

struct TrainingError : Error {
  using Error::Error;
};

// Invalid run configuration. `key` names the offending "section.key" when known.
struct ConfigError : Error {
  ConfigError(const std::string& what, std::string key = {}) : Error(what), key(std::move(key)) {}
  std::string key;
};

}  // namespace rmdl
