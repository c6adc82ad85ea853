#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace coarsenkit {

/// Library error with a short machine-readable code alongside the message.
/// Codes in use: "validation", "dimension", "argument", "solver", "io".
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& message) : Error("validation", message) {}
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& message) : Error("dimension", message) {}
};

class ArgumentError : public Error {
 public:
  explicit ArgumentError(const std::string& message) : Error("argument", message) {}
};

class SolverError : public Error {
 public:
  explicit SolverError(const std::string& message) : Error("solver", message) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error("io", message) {}
};

}  // namespace coarsenkit
