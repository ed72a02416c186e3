#pragma once

#include <stdexcept>
#include <string>

namespace gmf {

// Mirrors the status codes of the C API (include/gmf/gmf.h).
enum class ErrorCode : int {
  kInvalidArgument = 1,
  kConfig = 2,
  kInvariant = 3,
  kIo = 4,
  kDomain = 5,
  kNotConverged = 6,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what)
      : Error(ErrorCode::kInvalidArgument, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what)
      : Error(ErrorCode::kConfig, what) {}
};

// A model or numerical invariant was violated at runtime (simplex drift,
// fleet accounting, rate cache mismatch, ...).
class InvariantViolation : public Error {
 public:
  explicit InvariantViolation(const std::string& what)
      : Error(ErrorCode::kInvariant, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCode::kIo, what) {}
};

// A closed-form bound was evaluated outside the domain where it is defined.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what)
      : Error(ErrorCode::kDomain, what) {}
};

}  // namespace gmf
