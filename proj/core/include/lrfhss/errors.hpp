#pragma once

#include <stdexcept>
#include <string>

namespace lrfhss {

/// Input outside an operation's domain (alpha <= 2, negative density, payload too large, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical routine failed to meet its tolerance (quadrature, bisection).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reading or writing a file failed. The message carries the path.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace lrfhss
