#pragma once

#include <stdexcept>
#include <string>

namespace gapfair {

// Process exit codes used by the CLI: 0 success, 1 usage, 2 data, 3 numerical.
enum class ExitCode : int {
  ok = 0,
  usage = 1,
  data = 2,
  numerical = 3,
};

// Bad user input: malformed files, invalid configuration values, missing fields.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure: divergence, non-finite values, singular inputs.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace gapfair
