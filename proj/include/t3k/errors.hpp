#pragma once

#include <stdexcept>
#include <string>

namespace t3k {

/// Invalid input to a pure function (non-positive mass, j < 1, ...).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Base for failures that come from the physics rather than the caller:
/// resonances, poles, unidentifiable eigenstates, non-convergent sums.
class PhysicsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ResonanceError : public PhysicsError {
 public:
  using PhysicsError::PhysicsError;
};

class PoleError : public PhysicsError {
 public:
  PoleError(const std::string& what, int k, double distance)
      : PhysicsError(what), k_(k), distance_(distance) {}
  int k() const { return k_; }
  double distance() const { return distance_; }

 private:
  int k_;
  double distance_;
};

class ClassificationError : public PhysicsError {
 public:
  using PhysicsError::PhysicsError;
};

class ConvergenceError : public PhysicsError {
 public:
  using PhysicsError::PhysicsError;
};

}  // namespace t3k
