#include "maglab/fit.hpp"

#include "maglab/error.hpp"

#include <cmath>
#include <vector>

namespace maglab {

LogLogFit fit_loglog_slope(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size(), Errc::PreconditionViolation, "fit needs paired samples");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0 && y[i] > 0) || !std::isfinite(x[i]) || !std::isfinite(y[i])) continue;
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  const std::size_t n = lx.size();
  if (n < 3) fail(Errc::TooFewPoints, "log-log fit needs at least three positive points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx == 0.0) fail(Errc::TooFewPoints, "log-log fit needs distinct x values");
  LogLogFit fit;
  fit.points = static_cast<int>(n);
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  // Rounding in the mean leaves a tiny syy for constant data; treat that as
  // no variance.
  if (syy > 1e-24 * static_cast<double>(n) * (1.0 + my * my)) {
    double ss_res = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = ly[i] - (fit.intercept + fit.slope * lx[i]);
      ss_res += e * e;
    }
    fit.r2 = 1.0 - ss_res / syy;
  }
  return fit;
}

} // namespace maglab
