#pragma once

#include <stdexcept>
#include <string>

namespace vortexlab {

/// Iterative linear solve failed to reach its tolerance; carries the final
/// relative residual.
class NonConvergence : public std::runtime_error {
public:
  NonConvergence(const std::string& what, double relative_residual)
      : std::runtime_error(what + " (relative residual " +
                           std::to_string(relative_residual) + ")"),
        residual(relative_residual) {}
  double residual;
};

/// Boundary data are inconsistent with the pure-Neumann solvability condition.
class CompatibilityViolation : public std::runtime_error {
public:
  CompatibilityViolation(const std::string& what, double defect, double scale)
      : std::runtime_error(what), defect(defect), scale(scale) {}
  double defect;
  double scale;
};

/// Vortex placement violates the minimum-separation preconditions.
class PlacementError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Time step produced a blow-up (max |u| beyond the guard threshold).
class StepRejected : public std::runtime_error {
public:
  StepRejected(const std::string& what, double max_abs)
      : std::runtime_error(what), max_abs(max_abs) {}
  double max_abs;
};

/// Run configuration failed validation; names the offending field.
class ConfigError : public std::runtime_error {
public:
  ConfigError(const std::string& field, const std::string& what)
      : std::runtime_error("config field '" + field + "': " + what),
        field(field) {}
  std::string field;
};

/// Trajectory comparison got incompatible vortex sets.
class CountMismatch : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace vortexlab
