#pragma once

#include <stdexcept>
#include <string>

namespace gspse {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad user configuration (CLI flags, experiment grids). Exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Anything wrong with the case data itself. Exit code 3.
class CaseError : public Error {
 public:
  using Error::Error;
};

class MalformedCase : public CaseError {
 public:
  using CaseError::CaseError;
};

class NoReferenceBus : public CaseError {
 public:
  using CaseError::CaseError;
};

class ZeroReactanceBranch : public CaseError {
 public:
  using CaseError::CaseError;
};

class DisconnectedNetwork : public CaseError {
 public:
  using CaseError::CaseError;
};

// Numerical failures. Exit code 4.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ConvergenceFailure : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ZeroLambda2 : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class Unobservable : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class SingularSystem : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class SingularRegularizedSystem : public SingularSystem {
 public:
  using SingularSystem::SingularSystem;
};

class SingularGain : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class SingularRegularizedGain : public SingularGain {
 public:
  using SingularGain::SingularGain;
};

class NonConvergence : public NumericalError {
 public:
  NonConvergence(const std::string& what, int iterations, double last_step)
      : NumericalError(what), iterations_(iterations), last_step_(last_step) {}

  int iterations() const { return iterations_; }
  double last_step_norm() const { return last_step_; }

 private:
  int iterations_;
  double last_step_;
};

class TooLarge : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace gspse
