#include "maglab/error.hpp"

namespace maglab {

const char* to_string(Errc code) noexcept {
  switch (code) {
  case Errc::PacketUnresolved: return "PacketUnresolved";
  case Errc::PacketNearBoundary: return "PacketNearBoundary";
  case Errc::GridMismatch: return "GridMismatch";
  case Errc::InvalidGrid: return "InvalidGrid";
  case Errc::OrderTooHigh: return "OrderTooHigh";
  case Errc::UnresolvedState: return "UnresolvedState";
  case Errc::WeightOverflow: return "WeightOverflow";
  case Errc::ZeroState: return "ZeroState";
  case Errc::DerivativeOrderExceeded: return "DerivativeOrderExceeded";
  case Errc::NotAntisymmetric: return "NotAntisymmetric";
  case Errc::NotClosed: return "NotClosed";
  case Errc::NoConvergence: return "NoConvergence";
  case Errc::ResolutionTooCoarse: return "ResolutionTooCoarse";
  case Errc::ZeroDenominator: return "ZeroDenominator";
  case Errc::DerivativeCapExceeded: return "DerivativeCapExceeded";
  case Errc::NotNormalForm: return "NotNormalForm";
  case Errc::StructureViolation: return "StructureViolation";
  case Errc::InvalidRun: return "InvalidRun";
  case Errc::TooFewPoints: return "TooFewPoints";
  case Errc::ConfigError: return "ConfigError";
  case Errc::IoError: return "IoError";
  case Errc::PreconditionViolation: return "PreconditionViolation";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& what, double residual)
    : std::runtime_error(std::string(to_string(code)) + ": " + what),
      code_(code), residual_(residual) {}

void fail(Errc code, const std::string& what, double residual) {
  throw Error(code, what, residual);
}

} // namespace maglab
