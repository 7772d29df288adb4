#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nodeembed {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input: malformed text/JSON, shape mismatch, violated precondition.
class InputError : public Error {
 public:
  using Error::Error;
};

class SyntaxError : public InputError {
 public:
  SyntaxError(const std::string& what, std::size_t position)
      : InputError(what + " at position " + std::to_string(position)),
        position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// Arithmetic outside a function's domain (ln of a non-positive value,
/// division by zero, non-integer power of a negative base, ...).
/// `component` is the output component being evaluated, or -1.
class DomainError : public InputError {
 public:
  explicit DomainError(const std::string& what, int component = -1)
      : InputError(component >= 0
                       ? what + " (component " + std::to_string(component) + ")"
                       : what),
        component_(component) {}

  int component() const noexcept { return component_; }

 private:
  int component_;
};

/// Numerical failure: blow-up, step limit, non-convergence.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace nodeembed
