#pragma once

#include <stdexcept>
#include <string>

namespace trajrepair {

// Violated precondition on an argument (bad index, bad degree, ...).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Curve parameter outside the usable spline domain.
class DomainError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Least-squares spline fit could not be solved.
class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Query time outside an obstacle's prediction horizon.
class HorizonError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Non-finite cost or gradient inside the optimizer.
class OptimizerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Two spline pieces do not share their junction control points.
class StitchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Scenario document failed validation. `field` is the dotted path of the
// offending entry.
class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace trajrepair
