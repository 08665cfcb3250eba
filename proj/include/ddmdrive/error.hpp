#pragma once

#include <stdexcept>
#include <string>

namespace ddmdrive {

/// Bad input: malformed documents, out-of-range arguments, inconsistent
/// configuration. The CLI maps this to exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A grid or solver configuration that cannot produce a meaningful result.
class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Mathematical domain violation (singular covariance, non-positive speed in
/// a division, ...). The CLI maps this to exit code 3.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Numerical failure during a computation. The CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

template <typename Error = ValidationError>
inline void require(bool condition, const std::string& message) {
  if (!condition) throw Error(message);
}

}  // namespace detail
}  // namespace ddmdrive
