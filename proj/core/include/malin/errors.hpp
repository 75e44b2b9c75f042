#pragma once

#include <stdexcept>
#include <string>

namespace malin {

// Root of every error raised by the library. The CLI maps the three
// categories below onto its exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A mathematical hypothesis of the estimates is violated by the input
// (non-convexity, div B > 0, q <= n/2, ...).
class HypothesisError : public Error {
 public:
  using Error::Error;
};

// Numerical breakdown: stagnation, singular factorization, conditioning.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Caller broke an operation's contract.
class ContractError : public Error {
 public:
  using Error::Error;
};

class DomainError : public ContractError {
 public:
  using ContractError::ContractError;
};

class ConvexityError : public HypothesisError {
 public:
  using HypothesisError::HypothesisError;
};

class PinchViolation : public HypothesisError {
 public:
  using HypothesisError::HypothesisError;
};

class SectionError : public HypothesisError {
 public:
  using HypothesisError::HypothesisError;
};

class PositivityError : public HypothesisError {
 public:
  using HypothesisError::HypothesisError;
};

class ConditioningError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, double final_residual)
      : NumericalError(what), final_residual_(final_residual) {}
  double final_residual() const { return final_residual_; }

 private:
  double final_residual_;
};

class FactorizationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class AssemblyError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class MeshError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ResourceError : public NumericalError {
 public:
  ResourceError(const std::string& what, double estimated_nodes)
      : NumericalError(what), estimated_nodes_(estimated_nodes) {}
  double estimated_nodes() const { return estimated_nodes_; }

 private:
  double estimated_nodes_;
};

class MapError : public ContractError {
 public:
  using ContractError::ContractError;
};

}  // namespace malin
