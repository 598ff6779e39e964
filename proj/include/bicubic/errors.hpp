#pragma once

#include <stdexcept>
#include <string>

namespace bicubic {

/// Error classes map onto CLI exit codes: numerical failures exit with 3,
/// structural (shape/combinatorics) failures with 4, configuration with 2.
enum class ErrorClass { config = 2, numerical = 3, structural = 4 };

class Error : public std::runtime_error {
public:
  Error(ErrorClass cls, const std::string& what) : std::runtime_error(what), cls_(cls) {}
  ErrorClass error_class() const noexcept { return cls_; }

private:
  ErrorClass cls_;
};

class NumericalError : public Error {
public:
  explicit NumericalError(const std::string& what) : Error(ErrorClass::numerical, what) {}
};

class StructuralError : public Error {
public:
  explicit StructuralError(const std::string& what) : Error(ErrorClass::structural, what) {}
};

class ConfigError : public Error {
public:
  explicit ConfigError(const std::string& what) : Error(ErrorClass::config, what) {}
};

class NonFiniteSampleError : public NumericalError {
public:
  NonFiniteSampleError(double node, int index)
      : NumericalError("non-finite sample at node " + std::to_string(index) + " (x=" +
                       std::to_string(node) + ")"),
        node(node), index(index) {}
  double node;
  int index;
};

class OutOfDomainError : public NumericalError {
public:
  OutOfDomainError(const std::string& what, double distance)
      : NumericalError(what + " (distance " + std::to_string(distance) + ")"), distance(distance) {}
  double distance;
};

class CompositionRangeError : public NumericalError {
public:
  explicit CompositionRangeError(double escape)
      : NumericalError("composition range escape " + std::to_string(escape)), escape(escape) {}
  double escape;
};

class NearSingularInverseError : public NumericalError {
public:
  explicit NearSingularInverseError(double min_derivative)
      : NumericalError("near-singular inverse: min derivative " + std::to_string(min_derivative)),
        min_derivative(min_derivative) {}
  double min_derivative;
};

class MonotonicityError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

class ChainIntegrityError : public StructuralError {
public:
  ChainIntegrityError(const std::string& what, int stage)
      : StructuralError(what + " at stage " + std::to_string(stage)), stage(stage) {}
  int stage;
};

class DomainError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

class ShapeError : public StructuralError {
public:
  using StructuralError::StructuralError;
};

class DepthError : public StructuralError {
public:
  using StructuralError::StructuralError;
};

class CollisionError : public StructuralError {
public:
  using StructuralError::StructuralError;
};

class NotRenormalizableError : public StructuralError {
public:
  using StructuralError::StructuralError;
};

class RationalRotationError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

class ConvergenceError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

class NodeCountError : public StructuralError {
public:
  explicit NodeCountError(int count)
      : StructuralError("expected exactly 2 cube nodes, found " + std::to_string(count)), count(count) {}
  int count;
};

/// A critical point of order above 3 (two cube nodes threaded by one zero).
class DegenerateCriticalError : public StructuralError {
public:
  DegenerateCriticalError(double location, int order)
      : StructuralError("degenerate critical point of order " + std::to_string(order) + " at " +
                        std::to_string(location)),
        location(location), order(order) {}
  double location;
  int order;
};

class IncomparableError : public StructuralError {
public:
  using StructuralError::StructuralError;
};

class PartitionIntegrityError : public StructuralError {
public:
  using StructuralError::StructuralError;
};

/// Failure of one stage of a nested solver; `stage` names it.
class StagedSolveError : public NumericalError {
public:
  StagedSolveError(const std::string& stage, const std::string& what)
      : NumericalError(stage + ": " + what), stage(stage) {}
  std::string stage;
};

}  // namespace bicubic
