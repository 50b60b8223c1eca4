#pragma once

#include <stdexcept>
#include <string>

namespace aon {

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Adaptive quadrature did not stabilise at the largest node count.
class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// No sign change found where one is guaranteed.
class BracketError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Iteration hit its cap before meeting the tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double last_value)
      : std::runtime_error(what), last_value_(last_value) {}
  double last_value() const noexcept { return last_value_; }

 private:
  double last_value_;
};

class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid sweep/config input. `field` names the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& msg)
      : std::runtime_error(field + ": " + msg), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace aon
