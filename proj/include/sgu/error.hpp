#pragma once

#include <stdexcept>
#include <string>

namespace sgu {

/// Base class for every error raised by the library. The CLI maps the
/// concrete subclasses onto distinct exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text (edge lists, request files, checkpoints).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  explicit ParseError(const std::string& what) : Error(what) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_ = 0;
};

class InvalidSignError : public ParseError {
 public:
  using ParseError::ParseError;
};

class EmptyGraphError : public Error {
 public:
  using Error::Error;
};

class InvalidParamsError : public Error {
 public:
  using Error::Error;
};

/// Fewer initial clusters than requested shards.
class InfeasibleKError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

/// Inputs that are individually well-formed but inconsistent with each other.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace sgu
