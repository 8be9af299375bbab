#pragma once

#include <stdexcept>
#include <string>

namespace xychain {

/// Malformed or inconsistent user configuration (CLI exit status 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition of an operation was violated by its caller.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A computed quantity missed its residual bound.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, double residual)
      : std::runtime_error(what + " (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace xychain
