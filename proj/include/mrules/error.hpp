#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mrules {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Problems with the data handed to the engine: malformed files, unknown
/// names, candidates that are infeasible or sit outside the domain.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Failures of the numerical machinery itself.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class SyntaxError : public InputError {
 public:
  SyntaxError(std::size_t position, const std::string& message)
      : InputError("syntax error at " + std::to_string(position) + ": " +
                   message),
        position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

class UnknownVariable : public InputError {
 public:
  explicit UnknownVariable(std::string name)
      : InputError("unknown variable '" + name + "'"), name_(std::move(name)) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

class UnknownFunction : public InputError {
 public:
  explicit UnknownFunction(std::string name)
      : InputError("unknown function '" + name + "'"), name_(std::move(name)) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

/// Evaluation left the mathematical domain of an operation (log of a
/// negative number, division by zero, overflow, ...).
class DomainFault : public InputError {
 public:
  DomainFault(std::string operation, double operand)
      : InputError("domain fault in '" + operation + "' at operand " +
                   std::to_string(operand)),
        operation_(std::move(operation)),
        operand_(operand) {}
  const std::string& operation() const { return operation_; }
  double operand() const { return operand_; }

 private:
  std::string operation_;
  double operand_;
};

class FormatError : public InputError {
 public:
  FormatError(std::size_t line, const std::string& message)
      : InputError("line " + std::to_string(line) + ": " + message),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class DimensionMismatch : public InputError {
 public:
  using InputError::InputError;
};

class PointOutsideDomain : public InputError {
 public:
  using InputError::InputError;
};

class InfeasibleCandidate : public InputError {
 public:
  using InputError::InputError;
};

class StepLeavesDomain : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NonConvergent : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NumericalBreakdown : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// An LP that theory says must be solvable turned out infeasible.
class InternalInconsistency : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ResidualTooLarge : public NumericalError {
 public:
  ResidualTooLarge(const std::string& what, double residual, double limit)
      : NumericalError(what), residual_(residual), limit_(limit) {}
  double residual() const { return residual_; }
  double limit() const { return limit_; }

 private:
  double residual_;
  double limit_;
};

class CertificationFailed : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ZeroLeadingMultiplier : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace mrules
