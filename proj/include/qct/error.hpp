#pragma once

#include <stdexcept>
#include <string>

namespace qct {

// Exit-code families used by the CLI.
enum class ErrorClass { Config = 2, NumericalDomain = 3, Invariant = 4 };

class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, std::string kind, const std::string& what)
      : std::runtime_error(what), cls_(cls), kind_(std::move(kind)) {}

  ErrorClass error_class() const noexcept { return cls_; }
  const std::string& kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(cls_); }

 private:
  ErrorClass cls_;
  std::string kind_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(ErrorClass::Config, "ConfigError", what) {}
};

// Numerical-domain failures: the requested quantity does not exist for these inputs.
struct DomainError : Error {
  DomainError(std::string kind, const std::string& what)
      : Error(ErrorClass::NumericalDomain, std::move(kind), what) {}
};

// Runtime invariant violations (norm collapse, boundary leak, positivity loss, ...).
struct InvariantError : Error {
  InvariantError(std::string kind, const std::string& what)
      : Error(ErrorClass::Invariant, std::move(kind), what) {}
};

}  // namespace qct
