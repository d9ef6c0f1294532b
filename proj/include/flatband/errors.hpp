#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace flatband {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid physical or numerical parameters.
class ParameterError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class StatisticsError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what, long realization = -1)
      : Error(realization < 0 ? what : what + " (realization " + std::to_string(realization) + ")"),
        realization_(realization) {}

  long realization() const noexcept { return realization_; }

 private:
  long realization_;
};

class UnsupportedError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, std::string key = {}, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        key_(std::move(key)),
        line_(line) {}

  const std::string& key() const noexcept { return key_; }
  int line() const noexcept { return line_; }

 private:
  std::string key_;
  int line_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Join of two result directories failed (schema or time-grid mismatch).
class JoinError : public Error {
 public:
  using Error::Error;
};

// Non-fatal diagnostics go through a process-wide sink. Default prints to stderr.
using WarningHandler = std::function<void(std::string_view)>;

WarningHandler set_warning_handler(WarningHandler handler);
void warn(std::string_view message);

}  // namespace flatband
