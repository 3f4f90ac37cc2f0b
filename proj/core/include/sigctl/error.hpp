#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace sigctl {

// Malformed or invariant-violating configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Queue parameters that cannot produce the observed cycle flow.
class InfeasibleError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Shape mismatch between inputs (network widths, state dimensions, files).
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Input data that contradicts itself or is empty where data is required.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite loss, gradient or parameter during training.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Upstream artifact produced under a different configuration.
class HashMismatchError : public std::runtime_error {
 public:
  HashMismatchError(std::string file, std::string expected, std::string found)
      : std::runtime_error("config hash mismatch for " + file + ": expected " + expected +
                           ", found " + found),
        file_(std::move(file)),
        expected_(std::move(expected)),
        found_(std::move(found)) {}

  const std::string& file() const noexcept { return file_; }
  const std::string& expected() const noexcept { return expected_; }
  const std::string& found() const noexcept { return found_; }

 private:
  std::string file_;
  std::string expected_;
  std::string found_;
};

}  // namespace sigctl
