#pragma once

#include <stdexcept>
#include <string>

namespace cbm {

/// Argument outside the mathematical domain of an operation (e.g. a
/// non-positive gamma shape or inspection interval).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A computation produced a non-finite value or diverged.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent configuration / input file.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vector/matrix sizes that do not chain.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An inspection policy returned an unusable interval.
class PolicyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A trained model does not belong to the system it is applied to.
class FingerprintMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cbm
