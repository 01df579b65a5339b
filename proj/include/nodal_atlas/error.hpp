#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nodal_atlas {

enum class ErrorCode {
  InvalidInput,
  NonManifold,
  Disconnected,
  DegenerateTriangle,
  InconsistentOrientation,
  NotInvolutive,
  NotIsometric,
  NotSimplicial,
  OrientationPreserving,
  FixedSetNotCurve,
  BadResolution,
  NumericallyDegenerate,
  NoConvergence,
  BadK,
  MixedParityResidual,
  NotAPath,
  NotClosed,
  SelfIntersecting,
  ZeroEigenvalue,
  LengthMismatch,
  EmptySegment,
  AllAmbiguous,
  WrongParity,
  InconsistentInputs,
  TooFewPairs,
  HypothesisFailed,
  PathNotFixed,
  ConfigInvalid,
  MeshLoadFailed,
  SolverFailed,
  BundleCorrupt,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::NonManifold: return "NonManifold";
    case ErrorCode::Disconnected: return "Disconnected";
    case ErrorCode::DegenerateTriangle: return "DegenerateTriangle";
    case ErrorCode::InconsistentOrientation: return "InconsistentOrientation";
    case ErrorCode::NotInvolutive: return "NotInvolutive";
    case ErrorCode::NotIsometric: return "NotIsometric";
    case ErrorCode::NotSimplicial: return "NotSimplicial";
    case ErrorCode::OrientationPreserving: return "OrientationPreserving";
    case ErrorCode::FixedSetNotCurve: return "FixedSetNotCurve";
    case ErrorCode::BadResolution: return "BadResolution";
    case ErrorCode::NumericallyDegenerate: return "NumericallyDegenerate";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::BadK: return "BadK";
    case ErrorCode::MixedParityResidual: return "MixedParityResidual";
    case ErrorCode::NotAPath: return "NotAPath";
    case ErrorCode::NotClosed: return "NotClosed";
    case ErrorCode::SelfIntersecting: return "SelfIntersecting";
    case ErrorCode::ZeroEigenvalue: return "ZeroEigenvalue";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EmptySegment: return "EmptySegment";
    case ErrorCode::AllAmbiguous: return "AllAmbiguous";
    case ErrorCode::WrongParity: return "WrongParity";
    case ErrorCode::InconsistentInputs: return "InconsistentInputs";
    case ErrorCode::TooFewPairs: return "TooFewPairs";
    case ErrorCode::HypothesisFailed: return "HypothesisFailed";
    case ErrorCode::PathNotFixed: return "PathNotFixed";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::MeshLoadFailed: return "MeshLoadFailed";
    case ErrorCode::SolverFailed: return "SolverFailed";
    case ErrorCode::BundleCorrupt: return "BundleCorrupt";
  }
  return "Unknown";
}

/// Single exception type for the library; `code()` identifies the failure.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace nodal_atlas
