#pragma once

#include <stdexcept>
#include <string>

namespace kema {

enum class ErrorCode {
  InvalidArgument,
  DimensionMismatch,
  NotFinite,
  NonSymmetric,
  NegativeWeight,
  NegativeFeature,
  SingularAfterRegularization,
  TooFewNonzeroEigenvalues,
  KTooLarge,
  DegenerateDomain,
  NoLabeledPairs,
  ZeroSpread,
  EmptyRepresentativeSet,
  UnknownDomain,
  TargetKernelNotLinear,
  InvalidConfidence,
  InvalidSubspaceDim,
  NotPlanar,
  UnknownExperiment,
  NoLabeledTraining,
  Parse,
  Io,
};

// Coarse classes used for process exit codes.
enum class ErrorClass { Config, Data, Numeric, Io };

const char* to_string(ErrorCode code) noexcept;
ErrorClass error_class(ErrorCode code) noexcept;

// Exit code reported by the command-line tool for an error class.
int exit_code(ErrorClass cls) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace kema
