#pragma once

#include <stdexcept>
#include <string>

namespace spex {

// Argument outside the mathematical domain of a function.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Invalid user configuration: unknown covariates, bad formula files, missing columns.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A computation produced a non-finite or otherwise unusable result.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input data violate an invariant (duplicates, malformed rows, empty sets).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace spex
