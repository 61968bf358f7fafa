#include "maglab/operators.hpp"

#include "fft.hpp"
#include "maglab/error.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace maglab {

std::vector<SigmaWord> enumerate_words(int d, int max_len) {
  require(d >= 1 && max_len >= 0 && max_len <= kMaxWordLength, Errc::PreconditionViolation,
          "word enumeration out of range");
  std::vector<SigmaWord> out{SigmaWord{}};
  std::size_t level_begin = 0;
  for (int len = 1; len <= max_len; ++len) {
    const std::size_t level_end = out.size();
    for (std::size_t w = level_begin; w < level_end; ++w)
      for (int j = 0; j < d; ++j) {
        SigmaWord next = out[w];
        next.entries.push_back(j);
        out.push_back(std::move(next));
      }
    level_begin = level_end;
  }
  return out;
}

MagOperatorContext::MagOperatorContext(FieldModel model, GridSpec spec, double h)
    : model_(std::move(model)), spec_(spec), h_(h) {
  spec_.validate();
  require(h > 0, Errc::PreconditionViolation, "h must be positive");
  require(model_.dim() == spec_.dim, Errc::GridMismatch,
          "field model dimension differs from the grid");
  // -ih d/dx in Fourier space is multiplication by h k; the Nyquist mode is dropped.
  const auto k = detail::wavenumbers(spec_);
  for (double km : k) momentum_.push_back(h_ * km);
  momentum_[spec_.points / 2] = 0.0;
  const double kmax = std::numbers::pi * (spec_.points / 2) / spec_.half_width;
  for (int j = 0; j < spec_.dim; ++j) {
    A_.push_back(model_.sample_A(spec_, j));
    double amax = 0;
    for (double a : A_.back()) amax = std::max(amax, std::abs(a));
    spectral_bound_ += std::pow(h_ * kmax + amax, 2);
  }
}

Wavefunction apply_L(const MagOperatorContext& ctx, int j, const Wavefunction& psi) {
  require(psi.spec() == ctx.spec(), Errc::GridMismatch, "state grid differs from the context");
  require(j >= 0 && j < ctx.spec().dim, Errc::PreconditionViolation, "L index out of range");
  Wavefunction out = psi;
  detail::fourier_multiply_axis(out.values(), ctx.spec(), j, ctx.momentum_multiplier());
  const RealField& A = ctx.A(j);
  auto o = out.values();
  auto p = psi.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] -= A[i] * p[i];
  return out;
}

Wavefunction apply_word(const MagOperatorContext& ctx, const SigmaWord& sigma,
                        const Wavefunction& psi) {
  Wavefunction out = psi;
  for (auto it = sigma.entries.rbegin(); it != sigma.entries.rend(); ++it)
    out = apply_L(ctx, *it, out);
  return out;
}

Wavefunction apply_H(const MagOperatorContext& ctx, const Wavefunction& psi) {
  Wavefunction out(ctx.spec());
  for (int j = 0; j < ctx.spec().dim; ++j) out += apply_L(ctx, j, apply_L(ctx, j, psi));
  return out;
}

Wavefunction apply_H_power(const MagOperatorContext& ctx, int n, const Wavefunction& psi) {
  require(n >= 0, Errc::PreconditionViolation, "power must be nonnegative");
  Wavefunction out = psi;
  for (int i = 0; i < n; ++i) out = apply_H(ctx, out);
  return out;
}

double energy_identity_residual(const MagOperatorContext& ctx, const Wavefunction& psi) {
  double sum = 0;
  Wavefunction Hpsi(ctx.spec());
  for (int j = 0; j < ctx.spec().dim; ++j) {
    const Wavefunction Lpsi = apply_L(ctx, j, psi);
    const double n = l2_norm(Lpsi);
    sum += n * n;
    Hpsi += apply_L(ctx, j, Lpsi);
  }
  if (sum == 0.0) fail(Errc::ZeroState, "energy identity undefined for sum ||L_j psi||^2 = 0");
  return std::abs(inner(Hpsi, psi) - cplx(sum)) / sum;
}

namespace {

// (-h^2 Lap + shift)^{-1} applied through a full transform.
class FourierPreconditioner {
public:
  FourierPreconditioner(const GridSpec& spec, double h, double shift) : spec_(spec) {
    const auto k = detail::wavenumbers(spec);
    const std::size_t n = spec.size();
    diag_.resize(n);
    std::vector<int> idx(spec.dim, 0);
    for (std::size_t flat = 0; flat < n; ++flat) {
      double k2 = 0;
      for (int a = 0; a < spec.dim; ++a) k2 += k[idx[a]] * k[idx[a]];
      diag_[flat] = 1.0 / ((h * h * k2 + shift) * static_cast<double>(n));
      for (int a = spec.dim - 1; a >= 0; --a) {
        if (++idx[a] < spec.points) break;
        idx[a] = 0;
      }
    }
  }

  Wavefunction apply(const Wavefunction& r) const {
    Wavefunction z = r;
    detail::fft_all(z.values(), spec_, FFTW_FORWARD);
    auto v = z.values();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] *= diag_[i];
    detail::fft_all(z.values(), spec_, FFTW_BACKWARD);
    return z;
  }

private:
  GridSpec spec_;
  std::vector<double> diag_;
};

} // namespace

Wavefunction solve_H(const MagOperatorContext& ctx, const Wavefunction& f, double tol,
                     SolveStats* stats, bool allow_preconditioner) {
  require(f.spec() == ctx.spec(), Errc::GridMismatch, "right-hand side grid differs");
  require(tol > 1e-14 && tol < 1e-4, Errc::PreconditionViolation,
          "solve tolerance must lie in (1e-14, 1e-4)");
  const GridSpec& spec = ctx.spec();
  const double fnorm = l2_norm(f);
  Wavefunction u(spec);
  SolveStats local;
  if (fnorm == 0.0) {
    if (stats) *stats = local;
    return u;
  }
  const int cap = 20 * spec.points * spec.dim;
  const int switch_at = spec.points;
  const double b0 = ctx.model().b0();
  const FourierPreconditioner precond(spec, ctx.h(), ctx.h() * (b0 > 0 ? b0 : 1.0));

  Wavefunction r = f;
  bool use_pc = false;
  Wavefunction z = r;
  Wavefunction p = z;
  double rz = std::real(inner(r, z));
  double rnorm = fnorm;
  int it = 0;
  for (; it < cap; ++it) {
    if (rnorm <= 0.5 * tol * fnorm) break;
    if (allow_preconditioner && !use_pc && it == switch_at) {
      // Restart the recurrence with the preconditioner.
      use_pc = true;
      z = precond.apply(r);
      p = z;
      rz = std::real(inner(r, z));
    }
    const Wavefunction Ap = apply_H(ctx, p);
    const double pAp = std::real(inner(p, Ap));
    if (!(pAp > 0)) break;
    const double alpha = rz / pAp;
    u.axpy(alpha, p);
    r.axpy(-alpha, Ap);
    rnorm = l2_norm(r);
    z = use_pc ? precond.apply(r) : r;
    const double rz_next = std::real(inner(r, z));
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = z[i] + beta * p[i];
  }
  // Report the true residual, not the recurrence.
  const double true_res = l2_norm(apply_H(ctx, u) - f) / fnorm;
  local = SolveStats{it, true_res, use_pc};
  if (stats) *stats = local;
  if (true_res > tol)
    fail(Errc::NoConvergence, "conjugate gradients did not reach the tolerance", true_res);
  return u;
}

double elliptic_ratio(const MagOperatorContext& ctx, int n, const Wavefunction& psi) {
  require(n >= 0 && 2 * n <= kMaxWordLength, Errc::PreconditionViolation,
          "elliptic order out of range");
  const double denom = l2_norm(apply_H_power(ctx, n, psi));
  if (denom == 0.0) fail(Errc::ZeroDenominator, "||H^n psi|| vanishes");
  const int d = ctx.spec().dim;
  // Words sharing a suffix share the partial products L_suffix psi.
  std::vector<Wavefunction> level{psi};
  double sum = 0;
  auto account = [&](const Wavefunction& phi) {
    if (boundary_mass(phi, 0.1) > kBoundaryMassLimit)
      fail(Errc::UnresolvedState, "an intermediate L_sigma psi reaches the box edge");
    sum += l2_norm(phi);
  };
  account(psi);
  for (int len = 1; len <= 2 * n; ++len) {
    std::vector<Wavefunction> next;
    next.reserve(level.size() * d);
    for (const auto& phi : level)
      for (int j = 0; j < d; ++j) {
        next.push_back(apply_L(ctx, j, phi));
        account(next.back());
      }
    level = std::move(next);
  }
  return sum / denom;
}

double b_weighted_norm(const MagOperatorContext& ctx, const Wavefunction& psi) {
  const GridSpec& spec = ctx.spec();
  const int d = spec.dim;
  RealField weight(spec.size(), 1.0);
  const std::vector<int> zero(d, 0);
  for (int j = 0; j < d; ++j)
    for (int k = j + 1; k < d; ++k) {
      const RealField b = ctx.model().sample_dB(spec, zero, j, k);
      for (std::size_t i = 0; i < b.size(); ++i) weight[i] += 2.0 * b[i] * b[i];
    }
  for (auto& w : weight) w = std::sqrt(w);
  return l2_norm(multiply(weight, psi));
}

double graph_norm(const MagOperatorContext& ctx, const Wavefunction& psi) {
  const double a = l2_norm(psi), b = l2_norm(apply_H(ctx, psi));
  return std::sqrt(a * a + b * b);
}

Wavefunction coherent_packet(const MagOperatorContext& ctx, std::span<const double> center,
                             std::span<const double> momentum) {
  return gaussian_packet(ctx.spec(), center, momentum, std::sqrt(ctx.h()), ctx.h());
}

} // namespace maglab
