#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ridgefind {

enum class ErrorKind {
  kInput,
  kConfig,
  kBudget,
  kNumerical,
  kGeneration,
  kUnsupported,
  kIo,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error(ErrorKind::kInput, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::kConfig, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(ErrorKind::kNumerical, what) {}
};

class GenerationError : public Error {
 public:
  explicit GenerationError(const std::string& what) : Error(ErrorKind::kGeneration, what) {}
};

class UnsupportedError : public Error {
 public:
  explicit UnsupportedError(const std::string& what) : Error(ErrorKind::kUnsupported, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::kIo, what) {}
};

// Thrown when the sample count needed for a requested accuracy exceeds the cap.
// required_samples is 0 when no finite count suffices (tolerance below the noise floor).
class BudgetError : public Error {
 public:
  BudgetError(const std::string& what, std::uint64_t required_samples)
      : Error(ErrorKind::kBudget, what), required_(required_samples) {}
  std::uint64_t required_samples() const { return required_; }

 private:
  std::uint64_t required_;
};

}  // namespace ridgefind
