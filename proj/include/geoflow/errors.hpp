#pragma once

#include <stdexcept>
#include <string>

namespace geoflow {

/// Base of every error raised by the library. `module()` names the
/// component that raised it so front ends can tag their messages.
class Error : public std::runtime_error {
 public:
  Error(std::string module, const std::string& what)
      : std::runtime_error(what), module_(std::move(module)) {}

  const std::string& module() const noexcept { return module_; }

 private:
  std::string module_;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Degenerate metric, failed inversion and similar numerical breakdowns.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Adaptive step size collapsed below the representable minimum.
class StiffnessError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace geoflow
