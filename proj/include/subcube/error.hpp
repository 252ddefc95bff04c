#pragma once

#include <stdexcept>
#include <string>

namespace subcube {

enum class OracleErrorKind {
  zero_probability_condition,
  dimension_mismatch,
  malformed_query,
};

inline const char* to_string(OracleErrorKind kind) {
  switch (kind) {
    case OracleErrorKind::zero_probability_condition:
      return "ZeroProbabilityCondition";
    case OracleErrorKind::dimension_mismatch:
      return "DimensionMismatch";
    case OracleErrorKind::malformed_query:
      return "MalformedQuery";
  }
  return "Unknown";
}

// Raised by oracles. A zero-probability condition is recoverable: testers
// catch it and decide what it means.
class OracleError : public std::runtime_error {
 public:
  OracleError(OracleErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  OracleErrorKind kind() const noexcept { return kind_; }

 private:
  OracleErrorKind kind_;
};

}  // namespace subcube
