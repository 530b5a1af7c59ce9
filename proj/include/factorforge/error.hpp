#pragma once

#include <stdexcept>
#include <string>

namespace factorforge {

/// Base error for everything the engine reports to callers.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input file does not match the documented CSV layout.
class SchemaError : public Error {
 public:
  using Error::Error;
};

}  // namespace factorforge
