#pragma once

#include <stdexcept>
#include <string>

namespace mfinv {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
  virtual const char* kind() const noexcept { return "error"; }
};

/// An input violates a documented invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "validation"; }
};

/// A root finder or iterative routine failed to converge.
class NumericalError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "numerical"; }
};

/// A mathematically undefined request, e.g. a negative moment of a zero mass.
class DomainError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "domain"; }
};

/// A request would exceed a hard size limit.
class ResourceError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "resource"; }
};

/// Regression or scaling-range detection could not be carried out.
class FitError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "fit"; }
};

/// Exponent curve inversion could not be carried out.
class InversionError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "inversion"; }
};

}  // namespace mfinv
