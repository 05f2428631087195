#pragma once

#include <stdexcept>
#include <string>

namespace trajlab {

// Thrown when a caller breaks a module contract (dimension mismatch,
// foreign env state, exhausted inputs, ...). The CLI maps this to exit code 2.
class ContractViolation : public std::runtime_error {
 public:
  explicit ContractViolation(const std::string& what) : std::runtime_error(what) {}
};

// Bad user-facing configuration (unknown env id, invalid planner settings).
// The CLI maps this to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

inline void check_contract(bool ok, const std::string& what) {
  if (!ok) throw ContractViolation(what);
}

}  // namespace trajlab
