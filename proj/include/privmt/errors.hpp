#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace privmt {

// Bad configuration: missing files, contradictory options. CLI exit 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Backend transport failure that survived all retries. CLI exit 3.
class BackendError : public std::runtime_error {
 public:
  explicit BackendError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed or invalid input data. Carries the 1-based line number when the
// failure is tied to a specific record. CLI exit 4.
class DatasetError : public std::runtime_error {
 public:
  explicit DatasetError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what
                                : what),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Structural merge failure (malformed placeholder in model output).
class MergeError : public std::runtime_error {
 public:
  explicit MergeError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace privmt
