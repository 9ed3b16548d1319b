#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace shredrom {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  /// Short machine-readable category, e.g. "dimension" or "config".
  virtual const char* kind() const noexcept { return "error"; }
};

class DimensionError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "dimension"; }
};

class NonFiniteError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "non_finite"; }
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "invalid_argument"; }
};

/// Raised when sensor constraints cannot pin down every modal coefficient.
class NotObservableError : public Error {
 public:
  NotObservableError(const std::string& what, double condition)
      : Error(what), condition_(condition) {}
  const char* kind() const noexcept override { return "not_observable"; }
  double condition_number() const noexcept { return condition_; }

 private:
  double condition_;
};

/// A Kuramoto-Sivashinsky trajectory produced a non-finite value.
class BlowUpError : public Error {
 public:
  BlowUpError(double nu, double omega, std::size_t step)
      : Error("ks trajectory blew up (nu=" + std::to_string(nu) +
              ", omega=" + std::to_string(omega) +
              ", step=" + std::to_string(step) + ")"),
        nu_(nu), omega_(omega), step_(step) {}
  const char* kind() const noexcept override { return "blow_up"; }
  double nu() const noexcept { return nu_; }
  double omega() const noexcept { return omega_; }
  std::size_t step() const noexcept { return step_; }

 private:
  double nu_;
  double omega_;
  std::size_t step_;
};

/// Training diverged; the partial history is kept by the caller.
class DivergenceError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "divergence"; }
};

class FormatError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "format"; }
};

class LeakageError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "leakage"; }
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, std::string section, std::string key,
              std::size_t line)
      : Error(what), section_(std::move(section)), key_(std::move(key)),
        line_(line) {}
  const char* kind() const noexcept override { return "config"; }
  const std::string& section() const noexcept { return section_; }
  const std::string& key() const noexcept { return key_; }
  /// 1-based line in the config text, 0 when not tied to a line.
  std::size_t line() const noexcept { return line_; }

 private:
  std::string section_;
  std::string key_;
  std::size_t line_;
};

}  // namespace shredrom
