#include "maglab/error.hpp"
#include "maglab/operators.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>

namespace maglab {

namespace {

constexpr int kMaxBasis = 16;
constexpr int kKeepOnRestart = 6;
constexpr int kMaxIterations = 100;

// Lowest-Landau-level state at the node minimizing Tr+B (ties broken toward
// the origin), with the phase of the linearized gauge at that point, plus a
// small deterministic perturbation so no eigenvector is missed by symmetry.
Wavefunction initial_guess(const MagOperatorContext& ctx) {
  const GridSpec& spec = ctx.spec();
  const FieldModel& model = ctx.model();
  const int d = spec.dim;
  const RealField tr = model.sample_trace_plus(spec);
  const double tmax = *std::max_element(tr.begin(), tr.end());
  double best_tr = 0, best_r2 = 0;
  std::vector<double> xc(d);
  bool have = false;
  for_each_node(spec, [&](std::size_t i, std::span<const double> x) {
    double r2 = 0, inf = 0;
    for (double v : x) {
      r2 += v * v;
      inf = std::max(inf, std::abs(v));
    }
    if (inf > 0.75 * spec.half_width) return;
    const double slack = 1e-12 * std::max(1.0, tmax);
    if (!have || tr[i] < best_tr - slack || (tr[i] <= best_tr + slack && r2 < best_r2)) {
      have = true;
      best_tr = tr[i];
      best_r2 = r2;
      std::copy(x.begin(), x.end(), xc.begin());
    }
  });

  const double h = ctx.h();
  const double b_eff = std::max(2.0 * best_tr / d, 1e-12);
  const std::vector<double> A0 = model.eval_A(xc);
  Eigen::MatrixXd S(d, d);
  for (int j = 0; j < d; ++j)
    for (int k = 0; k < d; ++k) {
      std::vector<int> alpha(d, 0);
      alpha[k] = 1;
      S(j, k) = model.eval_dA(xc, alpha, j);
    }
  S = 0.5 * (S + S.transpose()).eval();

  std::mt19937_64 rng(0x6d61676cULL);
  std::normal_distribution<double> noise(0.0, 1.0);
  Wavefunction psi(spec);
  for_each_node(spec, [&](std::size_t i, std::span<const double> x) {
    Eigen::VectorXd y(d);
    for (int a = 0; a < d; ++a) y[a] = x[a] - xc[a];
    double phase = 0;
    for (int a = 0; a < d; ++a) phase += A0[a] * y[a];
    phase += 0.5 * y.dot(S * y);
    const double env = std::exp(-b_eff * y.squaredNorm() / (4.0 * h));
    const cplx jitter(noise(rng), noise(rng));
    psi[i] = env * (std::polar(1.0, phase / h) + 1e-3 * jitter);
  });
  psi *= 1.0 / l2_norm(psi);
  return psi;
}

} // namespace

EigenPair lowest_eigenpair(const MagOperatorContext& ctx, double tol) {
  const GridSpec& spec = ctx.spec();
  const double b0 = ctx.model().b0();
  require(b0 > 0, Errc::PreconditionViolation, "lowest_eigenvalue needs a field with b0 > 0");
  if (spec.spacing() > std::sqrt(ctx.h() / b0) / 4.0)
    fail(Errc::ResolutionTooCoarse, "grid spacing exceeds a quarter of the magnetic length");
  require(tol > 0 && tol < 1, Errc::PreconditionViolation, "eigen tolerance must lie in (0, 1)");

  std::vector<Wavefunction> V, HV;
  auto append = [&](Wavefunction w) {
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& v : V) w.axpy(-inner(v, w), v);
    const double n = l2_norm(w);
    if (n == 0.0) return false;
    w *= 1.0 / n;
    HV.push_back(apply_H(ctx, w));
    V.push_back(std::move(w));
    return true;
  };
  append(initial_guess(ctx));

  EigenPair result{0.0, Wavefunction(spec), 0.0, 0};
  for (int iter = 0; iter < kMaxIterations; ++iter) {
    const int k = static_cast<int>(V.size());
    Eigen::MatrixXcd G(k, k);
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) G(a, b) = inner(V[a], HV[b]);
    G = 0.5 * (G + G.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(G);

    auto combine = [&](const std::vector<Wavefunction>& basis, int col) {
      Wavefunction out(spec);
      for (int a = 0; a < k; ++a) out.axpy(es.eigenvectors()(a, col), basis[a]);
      return out;
    };
    const double theta = es.eigenvalues()[0];
    Wavefunction x = combine(V, 0);
    const Wavefunction Hx = combine(HV, 0);
    const double xn = l2_norm(x);
    const double res = l2_norm(Hx - cplx(theta) * x) / (std::abs(theta) * xn);
    result = EigenPair{theta, x, res, iter};
    if (res <= tol) return result;

    // Inexact inverse iteration: the Ritz step uses exact H products, so the
    // inner solve only has to track the current eigenresidual.
    const double inner_tol = std::clamp(0.1 * res, 1e-12, 5e-5);
    Wavefunction w = solve_H(ctx, x, inner_tol);
    if (k >= kMaxBasis) {
      std::vector<Wavefunction> keepV, keepHV;
      for (int c = 0; c < std::min(kKeepOnRestart, k); ++c) {
        keepV.push_back(combine(V, c));
        keepHV.push_back(combine(HV, c));
      }
      V = std::move(keepV);
      HV = std::move(keepHV);
    }
    if (!append(std::move(w))) break;
  }
  fail(Errc::NoConvergence, "inverse iteration did not reach the eigen tolerance",
       result.residual);
}

double lowest_eigenvalue(const MagOperatorContext& ctx, double tol) {
  return lowest_eigenpair(ctx, tol).value;
}

} // namespace maglab
