#pragma once

#include <stdexcept>
#include <string>

namespace hjcell {

// Caller broke a documented precondition (index range, size mismatch, ...).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A parameter or configuration value is outside its admissible range.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Closed-form reference evaluation could not be carried out.
class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool cond, const std::string& what) {
  if (!cond) throw ContractError(what);
}

inline void require_config(bool cond, const std::string& what) {
  if (!cond) throw ConfigError(what);
}

}  // namespace detail
}  // namespace hjcell
