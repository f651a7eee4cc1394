#pragma once

#include <stdexcept>
#include <string>

namespace collar {

enum class ErrorCode {
  NonRealSpectrum,
  ModulusCollision,
  NumericalFailure,
  DegeneratePencil,
  NotCoplanar,
  NotHyperbolic,
  DuplicatePoint,
  ConstructionFailure,
  CatalogInconsistent,
  RelatorBroken,
  NotPantsCurve,
  ConfigurationUnverified,
  NonNegativeCrossRatio,
  BadInput,
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::NonRealSpectrum: return "NonRealSpectrum";
    case ErrorCode::ModulusCollision: return "ModulusCollision";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::DegeneratePencil: return "DegeneratePencil";
    case ErrorCode::NotCoplanar: return "NotCoplanar";
    case ErrorCode::NotHyperbolic: return "NotHyperbolic";
    case ErrorCode::DuplicatePoint: return "DuplicatePoint";
    case ErrorCode::ConstructionFailure: return "ConstructionFailure";
    case ErrorCode::CatalogInconsistent: return "CatalogInconsistent";
    case ErrorCode::RelatorBroken: return "RelatorBroken";
    case ErrorCode::NotPantsCurve: return "NotPantsCurve";
    case ErrorCode::ConfigurationUnverified: return "ConfigurationUnverified";
    case ErrorCode::NonNegativeCrossRatio: return "NonNegativeCrossRatio";
    case ErrorCode::BadInput: return "BadInput";
  }
  return "Unknown";
}

// Single exception type for the whole library; `code` tells callers which
// contract was violated, `what()` carries the human-readable detail.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& msg)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + msg), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) { throw Error(code, msg); }

}  // namespace collar
