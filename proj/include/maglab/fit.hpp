#pragma once

#include <span>

namespace maglab {

struct LogLogFit {
  double slope = 0;
  double intercept = 0;
  /// Coefficient of determination; 1 when log y has no variance.
  double r2 = 1;
  int points = 0;
};

/// Ordinary least squares of log y on log x. Needs at least three points
/// with x, y > 0 (TooFewPoints).
LogLogFit fit_loglog_slope(std::span<const double> x, std::span<const double> y);

} // namespace maglab
