#pragma once

#include <stdexcept>
#include <string>

namespace maglab {

enum class Errc {
  PacketUnresolved,
  PacketNearBoundary,
  GridMismatch,
  InvalidGrid,
  OrderTooHigh,
  UnresolvedState,
  WeightOverflow,
  ZeroState,
  DerivativeOrderExceeded,
  NotAntisymmetric,
  NotClosed,
  NoConvergence,
  ResolutionTooCoarse,
  ZeroDenominator,
  DerivativeCapExceeded,
  NotNormalForm,
  StructureViolation,
  InvalidRun,
  TooFewPoints,
  ConfigError,
  IoError,
  PreconditionViolation,
};

const char* to_string(Errc code) noexcept;

/// Error raised by every maglab operation. `residual()` is meaningful for
/// NoConvergence only (final relative residual of the failed iteration).
class Error : public std::runtime_error {
public:
  Error(Errc code, const std::string& what, double residual = 0.0);

  Errc code() const noexcept { return code_; }
  double residual() const noexcept { return residual_; }

private:
  Errc code_;
  double residual_;
};

[[noreturn]] void fail(Errc code, const std::string& what, double residual = 0.0);

inline void require(bool cond, Errc code, const std::string& what) {
  if (!cond) fail(code, what);
}

} // namespace maglab
