#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace themis {

/// Base for every error raised by the library. `code()` is a stable,
/// machine-readable identifier; `path()` points into the offending document
/// (JSON pointer style) when one applies.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message, std::string path = {})
      : std::runtime_error(message), code_(std::move(code)), path_(std::move(path)) {}

  const std::string& code() const noexcept { return code_; }
  const std::string& path() const noexcept { return path_; }

 private:
  std::string code_;
  std::string path_;
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& message, std::string path = {})
      : Error("parse_error", message, std::move(path)) {}
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& message, std::string path = {})
      : Error("validation_error", message, std::move(path)) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message, std::string path = {})
      : Error("io_error", message, std::move(path)) {}
};

/// Raised for numerically degenerate input (empty intersections, constant
/// panels, too few points for a fit).
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& message, std::string path = {})
      : Error("domain_error", message, std::move(path)) {}
};

/// Wraps a failure from one pipeline stage, keeping the original code.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& cause)
      : Error(cause.code(), stage + ": " + cause.what(), cause.path()), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace themis
