#pragma once

#include <stdexcept>
#include <string>

namespace gnh {

/// Numerical breakdown: failed factorization, FD oracle asymmetry, non-PD metric.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File or stream failure, carries the offending path in the message.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed configuration, chain or problem description.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gnh
