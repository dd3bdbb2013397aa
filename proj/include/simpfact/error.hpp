#pragma once

#include <stdexcept>
#include <string>

namespace simpfact {

/// Root of every error the library throws. `exit_code()` is what the CLI
/// returns when the error escapes a subcommand: 1 for bad input, 2 for I/O.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
  virtual int exit_code() const noexcept { return 1; }
};

/// Caller violated an operation's precondition (wrong vote count, empty
/// reference list, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Malformed or out-of-range input data.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class AlignmentError : public ValidationError {
 public:
  AlignmentError(std::size_t complex_lines, std::size_t simple_lines)
      : ValidationError("line count mismatch: " + std::to_string(complex_lines) + " vs " +
                        std::to_string(simple_lines)),
        complex_lines_(complex_lines),
        simple_lines_(simple_lines) {}
  std::size_t complex_lines() const noexcept { return complex_lines_; }
  std::size_t simple_lines() const noexcept { return simple_lines_; }

 private:
  std::size_t complex_lines_;
  std::size_t simple_lines_;
};

class DecodeError : public ValidationError {
 public:
  DecodeError(const std::string& source, std::size_t byte_offset)
      : ValidationError("invalid UTF-8 in " + source + " at byte offset " +
                        std::to_string(byte_offset)),
        byte_offset_(byte_offset) {}
  std::size_t byte_offset() const noexcept { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

/// Input for which a quantity is mathematically undefined (zero-token
/// denominator, constant vector, zero embedding, no rating variance).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

class ProviderError : public Error {
 public:
  ProviderError(const std::string& provider, const std::string& cause)
      : Error("provider '" + provider + "' failed: " + cause), provider_(provider) {}
  const std::string& provider() const noexcept { return provider_; }

 private:
  std::string provider_;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public TrainingError {
 public:
  explicit DivergenceError(double step_size)
      : TrainingError("non-finite loss with step size " + std::to_string(step_size)),
        step_size_(step_size) {}
  double step_size() const noexcept { return step_size_; }

 private:
  double step_size_;
};

class IoError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 2; }
};

}  // namespace simpfact
