#pragma once

#include <stdexcept>
#include <string>

namespace rds {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter lies outside the domain an operation is defined on.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An omega window does not cover the index range an operation needs.
class WindowError : public Error {
 public:
  using Error::Error;
};

/// An iterative or limiting procedure did not settle.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace rds
