#pragma once

#include <stdexcept>
#include <string>

namespace sosim {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Raised by agent lookups, variable reads and protocol preconditions.
class EvalError : public Error {
 public:
  using Error::Error;
};

}  // namespace sosim
