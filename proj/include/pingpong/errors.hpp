#pragma once

#include <stdexcept>
#include <string>

namespace pingpong {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the domain where a quantity is defined.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Invalid or inconsistent run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Solver failure, norm anomaly or non-finite values during a computation.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// No chain satisfies the requested constraints.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

}  // namespace pingpong
