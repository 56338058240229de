#pragma once

#include <stdexcept>
#include <string>

namespace valleyqt {

/// Input outside an operation's mathematical domain (bad angles, non-PSD
/// matrices, nonpositive times...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Normalization or regression produced an unusable calibration.
class CalibrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Least-squares design matrix is rank deficient.
class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inconsistent or incomplete run configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file. `line()` is 1-based, 0 when not applicable.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// File system failure (unreadable input, unwritable output).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace valleyqt
