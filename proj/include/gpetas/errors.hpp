#pragma once

#include <stdexcept>
#include <string>

namespace gpetas {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid configuration: bad parameter values, missing required fields,
// inconsistent windows/grids.  CLI maps this to exit code 2.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Malformed input data (CSV/JSON parse failures).  CLI maps this to exit code 2.
class DataError : public Error {
 public:
  explicit DataError(const std::string& msg) : Error(msg) {}
};

// Numerical failure (factorization failure after jitter escalation,
// divergent sampler state).  CLI maps this to exit code 3.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& msg) : Error(msg) {}
};

}  // namespace gpetas
