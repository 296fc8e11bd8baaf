#pragma once

#include <stdexcept>
#include <string>

namespace irisqa {

/// Input data violates a documented invariant or precondition.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Filesystem or stream failure.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numeric computation cannot proceed (divergence, undefined statistic, ...).
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace irisqa
