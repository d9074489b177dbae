#include "kema/errors.hpp"

namespace kema {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotFinite: return "NotFinite";
    case ErrorCode::NonSymmetric: return "NonSymmetric";
    case ErrorCode::NegativeWeight: return "NegativeWeight";
    case ErrorCode::NegativeFeature: return "NegativeFeature";
    case ErrorCode::SingularAfterRegularization: return "SingularAfterRegularization";
    case ErrorCode::TooFewNonzeroEigenvalues: return "TooFewNonzeroEigenvalues";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::DegenerateDomain: return "DegenerateDomain";
    case ErrorCode::NoLabeledPairs: return "NoLabeledPairs";
    case ErrorCode::ZeroSpread: return "ZeroSpread";
    case ErrorCode::EmptyRepresentativeSet: return "EmptyRepresentativeSet";
    case ErrorCode::UnknownDomain: return "UnknownDomain";
    case ErrorCode::TargetKernelNotLinear: return "TargetKernelNotLinear";
    case ErrorCode::InvalidConfidence: return "InvalidConfidence";
    case ErrorCode::InvalidSubspaceDim: return "InvalidSubspaceDim";
    case ErrorCode::NotPlanar: return "NotPlanar";
    case ErrorCode::UnknownExperiment: return "UnknownExperiment";
    case ErrorCode::NoLabeledTraining: return "NoLabeledTraining";
    case ErrorCode::Parse: return "Parse";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

ErrorClass error_class(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::KTooLarge:
    case ErrorCode::UnknownDomain:
    case ErrorCode::TargetKernelNotLinear:
    case ErrorCode::InvalidConfidence:
    case ErrorCode::InvalidSubspaceDim:
    case ErrorCode::UnknownExperiment:
    case ErrorCode::EmptyRepresentativeSet:
      return ErrorClass::Config;
    case ErrorCode::DimensionMismatch:
    case ErrorCode::NotFinite:
    case ErrorCode::NegativeFeature:
    case ErrorCode::DegenerateDomain:
    case ErrorCode::NoLabeledPairs:
    case ErrorCode::ZeroSpread:
    case ErrorCode::NotPlanar:
    case ErrorCode::NoLabeledTraining:
    case ErrorCode::Parse:
      return ErrorClass::Data;
    case ErrorCode::NonSymmetric:
    case ErrorCode::NegativeWeight:
    case ErrorCode::SingularAfterRegularization:
    case ErrorCode::TooFewNonzeroEigenvalues:
      return ErrorClass::Numeric;
    case ErrorCode::Io:
      return ErrorClass::Io;
  }
  return ErrorClass::Config;
}

int exit_code(ErrorClass cls) noexcept {
  switch (cls) {
    case ErrorClass::Config: return 2;
    case ErrorClass::Data: return 3;
    case ErrorClass::Numeric: return 4;
    case ErrorClass::Io: return 5;
  }
  return 1;
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace kema
