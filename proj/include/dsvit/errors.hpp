#pragma once

#include <stdexcept>
#include <string>

namespace dsvit {

// Process exit codes used by the command-line tool.
enum class ExitCode : int {
  kOk = 0,
  kInvalidInput = 2,
  kNumericalFailure = 3,
  kInvariantViolation = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ExitCode code() const noexcept { return code_; }

 private:
  ExitCode code_;
};

// Bad arguments, shape mismatches, malformed files, missing files.
class InvalidInput : public Error {
 public:
  explicit InvalidInput(const std::string& what) : Error(ExitCode::kInvalidInput, what) {}
};

class ShapeError : public InvalidInput {
 public:
  explicit ShapeError(const std::string& what) : InvalidInput("shape error: " + what) {}
};

class FormatError : public InvalidInput {
 public:
  explicit FormatError(const std::string& what) : InvalidInput("format error: " + what) {}
};

class IoError : public InvalidInput {
 public:
  explicit IoError(const std::string& what) : InvalidInput("i/o error: " + what) {}
};

// NaN/Inf produced anywhere in the numeric pipeline, or a diverged loss.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what)
      : Error(ExitCode::kNumericalFailure, "numerical failure: " + what) {}
};

class InvariantViolation : public Error {
 public:
  explicit InvariantViolation(const std::string& what)
      : Error(ExitCode::kInvariantViolation, "invariant violation: " + what) {}
};

}  // namespace dsvit
