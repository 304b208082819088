#pragma once

#include <stdexcept>
#include <string>

namespace icapath {

// Argument outside a function's mathematical domain (negative t, λ <= 0, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Malformed or out-of-support input data.
class DataError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Non-finite objective or another numerical breakdown inside an iteration.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Request exceeds a brute-force or resource limit.
class ScaleRefusal : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace icapath
