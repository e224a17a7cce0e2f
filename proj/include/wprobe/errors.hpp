#pragma once

#include <stdexcept>
#include <string>

namespace wprobe {

/// Invalid input or configuration. The CLI maps this to exit status 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical invariant was violated at run time (non-PSD kernel, quadrature
/// tail breach, ...). The CLI maps this to exit status 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace wprobe
