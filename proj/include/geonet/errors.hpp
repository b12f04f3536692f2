#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace geonet {

/// Precondition violated by the caller (bad parameter, non-unit vector, ...).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Operation is not defined for the object's current state
/// (e.g. petal angles of a cage).
class InvalidState : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Integration or projection broke down.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Iterative relaxation ran out of sweeps. Carries the last iterate so the
/// caller can inspect or reuse it.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, std::vector<Eigen::Vector3d> last)
      : std::runtime_error(what), last_iterate(std::move(last)) {}

  std::vector<Eigen::Vector3d> last_iterate;
};

/// Broken internal invariant; never expected in a correct build.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace geonet
