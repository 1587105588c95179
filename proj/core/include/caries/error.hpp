#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace caries {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or precondition violation in user-supplied input.
class ConfigError : public Error {
public:
  using Error::Error;
};

class InvalidPolygonError : public ConfigError {
public:
  using ConfigError::ConfigError;
};

class EmptyComponentError : public ConfigError {
public:
  using ConfigError::ConfigError;
};

/// Tensor or raster dimensions that do not agree.
class ShapeError : public Error {
public:
  using Error::Error;
};

/// Filesystem failure: missing, unreadable or unwritable path.
class IoError : public Error {
public:
  using Error::Error;
};

/// Malformed file content. `offset` is the byte position where parsing failed.
class FormatError : public Error {
public:
  FormatError(const std::string& what, std::uint64_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}

  std::uint64_t offset() const noexcept { return offset_; }

private:
  std::uint64_t offset_;
};

}  // namespace caries
