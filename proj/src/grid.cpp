#include "maglab/grid.hpp"

#include "fft.hpp"
#include "maglab/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace maglab {

GridSpec GridSpec::make(int d, double half_width, int points) {
  GridSpec spec{d, half_width, points};
  spec.validate();
  return spec;
}

void GridSpec::validate() const {
  require(dim >= 1 && dim <= 4, Errc::InvalidGrid, "dimension must be in 1..4");
  require(half_width > 0 && std::isfinite(half_width), Errc::InvalidGrid,
          "half_width must be positive");
  require(points >= 8 && (points & (points - 1)) == 0, Errc::InvalidGrid,
          "points_per_axis must be a power of two >= 8");
  require(std::log2(static_cast<double>(points)) * dim <= 28.0, Errc::InvalidGrid,
          "N^d exceeds 2^28 nodes");
}

double GridSpec::cell_volume() const { return std::pow(spacing(), dim); }

std::size_t GridSpec::size() const {
  std::size_t n = 1;
  for (int a = 0; a < dim; ++a) n *= static_cast<std::size_t>(points);
  return n;
}

std::size_t GridSpec::stride(int axis) const {
  std::size_t s = 1;
  for (int a = axis + 1; a < dim; ++a) s *= static_cast<std::size_t>(points);
  return s;
}

Wavefunction::Wavefunction(const GridSpec& spec) : spec_(spec), values_(spec.size()) {}

Wavefunction::Wavefunction(const GridSpec& spec, std::vector<cplx> values)
    : spec_(spec), values_(std::move(values)) {
  require(values_.size() == spec_.size(), Errc::GridMismatch,
          "value count does not match N^d");
}

Wavefunction& Wavefunction::operator+=(const Wavefunction& other) {
  require_same_grid(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

Wavefunction& Wavefunction::operator-=(const Wavefunction& other) {
  require_same_grid(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

Wavefunction& Wavefunction::operator*=(cplx scale) {
  for (auto& v : values_) v *= scale;
  return *this;
}

void Wavefunction::axpy(cplx a, const Wavefunction& x) {
  require_same_grid(*this, x);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += a * x.values_[i];
}

bool Wavefunction::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](const cplx& v) {
    return std::isfinite(v.real()) && std::isfinite(v.imag());
  });
}

Wavefunction operator+(Wavefunction a, const Wavefunction& b) { return a += b; }
Wavefunction operator-(Wavefunction a, const Wavefunction& b) { return a -= b; }
Wavefunction operator*(cplx s, Wavefunction a) { return a *= s; }

void require_same_grid(const Wavefunction& a, const Wavefunction& b) {
  require(a.spec() == b.spec(), Errc::GridMismatch, "wavefunctions live on different grids");
}

RealField coordinate_field(const GridSpec& spec, int axis) {
  RealField out(spec.size());
  for_each_node(spec, [&](std::size_t i, std::span<const double> x) { out[i] = x[axis]; });
  return out;
}

Wavefunction multiply(const RealField& f, const Wavefunction& psi) {
  require(f.size() == psi.size(), Errc::GridMismatch, "multiplier size mismatch");
  Wavefunction out(psi.spec());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i] * psi[i];
  return out;
}

Wavefunction gaussian_packet(const GridSpec& spec, std::span<const double> center,
                             std::span<const double> momentum, double width, double h) {
  require(static_cast<int>(center.size()) == spec.dim &&
              static_cast<int>(momentum.size()) == spec.dim,
          Errc::PreconditionViolation, "center/momentum must have d components");
  require(h > 0, Errc::PreconditionViolation, "h must be positive");
  if (!(width >= 4.0 * spec.spacing()))
    fail(Errc::PacketUnresolved, "width " + std::to_string(width) + " below 4 grid spacings");
  for (int a = 0; a < spec.dim; ++a) {
    if (spec.half_width - std::abs(center[a]) < 4.0 * width)
      fail(Errc::PacketNearBoundary, "packet center within 4 widths of the box face");
  }
  const double norm = std::pow(std::numbers::pi * width * width, -0.25 * spec.dim);
  const double inv2s2 = 0.5 / (width * width);
  Wavefunction psi(spec);
  for_each_node(spec, [&](std::size_t i, std::span<const double> x) {
    double r2 = 0, phase = 0;
    for (int a = 0; a < spec.dim; ++a) {
      const double y = x[a] - center[a];
      r2 += y * y;
      phase += momentum[a] * y;
    }
    psi[i] = norm * std::exp(-r2 * inv2s2) * std::polar(1.0, phase / h);
  });
  return psi;
}

Wavefunction spectral_derivative(const Wavefunction& psi, int axis, int order) {
  const auto& spec = psi.spec();
  require(axis >= 0 && axis < spec.dim, Errc::PreconditionViolation, "axis out of range");
  require(order >= 0, Errc::PreconditionViolation, "derivative order must be >= 0");
  if (order == 0) return psi;
  const auto k = detail::wavenumbers(spec);
  std::vector<cplx> mult(k.size());
  for (std::size_t m = 0; m < k.size(); ++m) mult[m] = std::pow(cplx(0.0, k[m]), order);
  if (order % 2 == 1) mult[spec.points / 2] = 0.0;
  Wavefunction out = psi;
  detail::fourier_multiply_axis(out.values(), spec, axis, mult);
  return out;
}

Wavefunction spectral_partial(const Wavefunction& psi, std::span<const int> beta) {
  Wavefunction out = psi;
  for (int a = 0; a < static_cast<int>(beta.size()); ++a)
    if (beta[a] > 0) out = spectral_derivative(out, a, beta[a]);
  return out;
}

cplx inner(const Wavefunction& psi, const Wavefunction& phi) {
  require_same_grid(psi, phi);
  cplx sum = 0;
  const auto a = psi.values();
  const auto b = phi.values();
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::conj(a[i]) * b[i];
  return sum * psi.spec().cell_volume();
}

double l2_norm(const Wavefunction& psi) {
  double sum = 0;
  for (const auto& v : psi.values()) sum += std::norm(v);
  return std::sqrt(sum * psi.spec().cell_volume());
}

double spectral_l2_norm(const Wavefunction& psi) {
  std::vector<cplx> coeffs(psi.values().begin(), psi.values().end());
  detail::fft_all(coeffs, psi.spec(), -1);
  double sum = 0;
  for (const auto& c : coeffs) sum += std::norm(c);
  return std::sqrt(sum / static_cast<double>(psi.size()) * psi.spec().cell_volume());
}

namespace {

void multi_indices_upto(int d, int max_order, std::vector<std::vector<int>>& out) {
  std::vector<int> cur(d, 0);
  auto rec = [&](auto&& self, int axis, int remaining) -> void {
    if (axis == d) {
      out.push_back(cur);
      return;
    }
    for (int e = 0; e <= remaining; ++e) {
      cur[axis] = e;
      self(self, axis + 1, remaining - e);
    }
    cur[axis] = 0;
  };
  rec(rec, 0, max_order);
}

int total(const std::vector<int>& a) {
  int s = 0;
  for (int v : a) s += v;
  return s;
}

} // namespace

double seminorm_pk(const Wavefunction& psi, int k) {
  if (k < 0 || k > 6) fail(Errc::OrderTooHigh, "p_k supports 0 <= k <= 6");
  if (l2_norm(psi) == 0.0) return 0.0;
  const double leak = boundary_mass(psi, 0.1);
  if (leak > kBoundaryMassLimit)
    fail(Errc::UnresolvedState, "boundary mass " + std::to_string(leak) + " exceeds 1e-8");

  const auto& spec = psi.spec();
  std::vector<std::vector<int>> indices;
  multi_indices_upto(spec.dim, k, indices);

  std::vector<RealField> coords;
  for (int a = 0; a < spec.dim; ++a) coords.push_back(coordinate_field(spec, a));

  double best = 0;
  for (const auto& beta : indices) {
    const Wavefunction deriv = spectral_partial(psi, beta);
    std::vector<double> modulus(deriv.size());
    for (std::size_t i = 0; i < deriv.size(); ++i) modulus[i] = std::abs(deriv[i]);
    for (const auto& alpha : indices) {
      if (total(alpha) + total(beta) > k) continue;
      for (std::size_t i = 0; i < modulus.size(); ++i) {
        double w = modulus[i];
        for (int a = 0; a < spec.dim; ++a)
          for (int e = 0; e < alpha[a]; ++e) w *= std::abs(coords[a][i]);
        best = std::max(best, w);
      }
    }
  }
  return best;
}

double weighted_l2(const Wavefunction& psi, double beta) {
  const auto& spec = psi.spec();
  require(beta >= 0, Errc::PreconditionViolation, "beta must be >= 0");
  if (beta * spec.half_width * std::sqrt(static_cast<double>(spec.dim)) > 700.0)
    fail(Errc::WeightOverflow, "beta * L * sqrt(d) exceeds 700");
  if (beta == 0.0) return l2_norm(psi);
  double sum = 0;
  for_each_node(spec, [&](std::size_t i, std::span<const double> x) {
    double r2 = 1.0;
    for (double c : x) r2 += c * c;
    const double w = std::exp(beta * std::sqrt(r2));
    sum += std::norm(w * psi[i]);
  });
  return std::sqrt(sum * spec.cell_volume());
}

double boundary_mass(const Wavefunction& psi, double margin_fraction) {
  const auto& spec = psi.spec();
  require(margin_fraction > 0 && margin_fraction < 0.5, Errc::PreconditionViolation,
          "margin fraction must be in (0, 0.5)");
  const double edge = (1.0 - margin_fraction) * spec.half_width;
  const double dx = spec.spacing();
  // Fraction of each axis cell [x_i, x_i + dx) lying inside (-edge, edge).
  std::vector<double> inside(spec.points);
  for (int i = 0; i < spec.points; ++i) {
    const double lo = spec.coordinate(i);
    const double overlap = std::min(lo + dx, edge) - std::max(lo, -edge);
    inside[i] = std::clamp(overlap / dx, 0.0, 1.0);
  }
  double shell = 0, totalmass = 0;
  std::vector<int> idx(spec.dim, 0);
  const std::size_t n = psi.size();
  for (std::size_t flat = 0; flat < n; ++flat) {
    double frac = 1.0;
    for (int a = 0; a < spec.dim; ++a) frac *= inside[idx[a]];
    const double m = std::norm(psi[flat]);
    totalmass += m;
    shell += (1.0 - frac) * m;
    for (int a = spec.dim - 1; a >= 0; --a) {
      if (++idx[a] < spec.points) break;
      idx[a] = 0;
    }
  }
  if (totalmass == 0.0) fail(Errc::ZeroState, "boundary mass of the zero state");
  return shell / totalmass;
}

} // namespace maglab
