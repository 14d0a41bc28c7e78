#pragma once

#include <stdexcept>
#include <string>

namespace conicip {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ValidationKind { DimensionMismatch, NonSymmetricP, BadConeSpec, NonFiniteData, BadStructure };

const char* to_string(ValidationKind kind);

class ValidationError : public Error {
 public:
  ValidationError(ValidationKind kind, const std::string& what)
      : Error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  [[nodiscard]] ValidationKind kind() const { return kind_; }

 private:
  ValidationKind kind_;
};

/// A point handed to a barrier or scaling routine is not strictly interior.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A scaling block could not be formed (the iterate numerically left the cone interior).
class ScalingFailure : public Error {
 public:
  using Error::Error;
};

class StepTooSmall : public Error {
 public:
  explicit StepTooSmall(double alpha)
      : Error("step length " + std::to_string(alpha) + " below minimum"), alpha_(alpha) {}
  [[nodiscard]] double alpha() const { return alpha_; }

 private:
  double alpha_;
};

class FactorizationFailure : public Error {
 public:
  using Error::Error;
};

class PatternMismatch : public Error {
 public:
  using Error::Error;
};

class DegenerateDenominator : public Error {
 public:
  using Error::Error;
};

}  // namespace conicip
