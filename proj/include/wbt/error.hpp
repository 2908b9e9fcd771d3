#pragma once

#include <stdexcept>
#include <string>

namespace wbt {

enum class ErrorKind {
  invalid_config,
  unknown_family,
  invalid_parameter,
  zero_mark,
  no_sign_change,
  contraction_root,
  noisy_functional,
  budget_exhausted,
  precondition,
  unsupported,
  io,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_config: return "invalid-config";
    case ErrorKind::unknown_family: return "unknown-family";
    case ErrorKind::invalid_parameter: return "invalid-parameter";
    case ErrorKind::zero_mark: return "zero-Q";
    case ErrorKind::no_sign_change: return "no-sign-change";
    case ErrorKind::contraction_root: return "contraction-root";
    case ErrorKind::noisy_functional: return "noisy-functional";
    case ErrorKind::budget_exhausted: return "budget-exhausted";
    case ErrorKind::precondition: return "precondition-unmet";
    case ErrorKind::unsupported: return "unsupported";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace wbt
