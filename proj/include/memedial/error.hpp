#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace memedial {

// Base class for every error the library raises. `kind()` is a short stable
// tag that the CLI prints in its structured error line.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line = 0)
      : Error("parse", line ? "line " + std::to_string(line) + ": " + message : message),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& message) : Error("validation", message) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error("io", message) {}
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& message) : Error("dimension", message) {}
};

class MissingEmbeddingError : public Error {
 public:
  explicit MissingEmbeddingError(const std::string& message)
      : Error("missing-embedding", message) {}
};

// A model response that did not follow the requested delimited layout.
// Carries the raw text so callers can log or inspect it.
class FormatError : public Error {
 public:
  FormatError(const std::string& message, std::string raw_response)
      : Error("format", message), raw_(std::move(raw_response)) {}
  const std::string& raw_response() const noexcept { return raw_; }

 private:
  std::string raw_;
};

class BackendError : public Error {
 public:
  BackendError(const std::string& message, int attempts = 1, bool retryable = false)
      : Error("backend", message), attempts_(attempts), retryable_(retryable) {}
  int attempts() const noexcept { return attempts_; }
  bool retryable() const noexcept { return retryable_; }

 private:
  int attempts_;
  bool retryable_;
};

}  // namespace memedial
