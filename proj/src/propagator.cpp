#include "maglab/propagator.hpp"

#include "maglab/error.hpp"
#include "maglab/quadrature.hpp"
#include "maglab/symbolic_checks.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace maglab {

void PropagatorConfig::validate() const {
  require(krylov_dim >= 8, Errc::PreconditionViolation, "krylov_dim must be >= 8");
  require(tol > 1e-14 && tol < 1e-4, Errc::PreconditionViolation,
          "propagator tol must lie in (1e-14, 1e-4)");
  require(dt >= 0 && max_steps > 0, Errc::PreconditionViolation, "invalid dt or max_steps");
}

namespace {

// (e^z - 1) / z
cplx phi1(cplx z) {
  if (std::abs(z) < 1e-5) return 1.0 + z / 2.0 + z * z / 6.0;
  return (std::exp(z) - 1.0) / z;
}

// Lanczos basis of the Krylov space of H at v with the spectral data of the
// projected tridiagonal matrix.
struct KrylovBasis {
  std::vector<Wavefunction> q;
  Eigen::VectorXd lambda;
  Eigen::MatrixXd U;
  double beta0 = 0;    // ||v||
  double beta_m = 0;   // residual coupling, 0 on happy breakdown
};

KrylovBasis lanczos(const MagOperatorContext& ctx, const Wavefunction& v, int m) {
  KrylovBasis kb;
  kb.beta0 = l2_norm(v);
  std::vector<double> alpha, beta;
  Wavefunction q0 = v;
  q0 *= 1.0 / kb.beta0;
  kb.q.push_back(std::move(q0));
  for (int j = 0; j < m; ++j) {
    Wavefunction w = apply_H(ctx, kb.q[j]);
    const double a = std::real(inner(kb.q[j], w));
    alpha.push_back(a);
    // Full reorthogonalization, two passes.
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& qi : kb.q) w.axpy(-inner(qi, w), qi);
    const double b = l2_norm(w);
    const double scale = std::max(std::abs(a), j > 0 ? beta.back() : 0.0);
    if (b <= 1e-13 * std::max(scale, 1e-300)) {
      kb.beta_m = 0;
      break;
    }
    kb.beta_m = b;
    if (j + 1 == m) break;
    beta.push_back(b);
    w *= 1.0 / b;
    kb.q.push_back(std::move(w));
  }
  const int k = static_cast<int>(alpha.size());
  kb.q.resize(k);
  Eigen::VectorXd diag = Eigen::Map<Eigen::VectorXd>(alpha.data(), k);
  Eigen::VectorXd sub = Eigen::VectorXd::Zero(std::max(k - 1, 0));
  for (int i = 0; i + 1 < k; ++i) sub[i] = beta[i];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  if (k == 1) {
    kb.lambda = diag;
    kb.U = Eigen::MatrixXd::Identity(1, 1);
  } else {
    es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    kb.lambda = es.eigenvalues();
    kb.U = es.eigenvectors();
  }
  return kb;
}

// A posteriori estimate of the local error of the Krylov exponential over tau,
// relative to ||v||.
double local_error(const KrylovBasis& kb, double tau, double h) {
  if (kb.beta_m == 0.0) return 0.0;
  const int k = static_cast<int>(kb.lambda.size());
  cplx s = 0;
  for (int i = 0; i < k; ++i)
    s += kb.U(k - 1, i) * phi1(cplx(0.0, tau * kb.lambda[i] / h)) * kb.U(0, i);
  return kb.beta_m * (tau / h) * std::abs(s);
}

Wavefunction krylov_exponential(const KrylovBasis& kb, double tau, double h) {
  const int k = static_cast<int>(kb.lambda.size());
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(k);
  for (int i = 0; i < k; ++i) {
    const cplx e = std::polar(1.0, tau * kb.lambda[i] / h) * kb.U(0, i);
    for (int r = 0; r < k; ++r) c[r] += kb.U(r, i) * e;
  }
  Wavefunction out(kb.q[0].spec());
  for (int r = 0; r < k; ++r) out.axpy(kb.beta0 * c[r], kb.q[r]);
  return out;
}

} // namespace

KrylovStepper::KrylovStepper(const MagOperatorContext& ctx, const PropagatorConfig& cfg)
    : ctx_(ctx), cfg_(cfg) {
  cfg_.validate();
  tau_guess_ = cfg_.dt > 0 ? cfg_.dt : 10.0 * ctx_.h() / ctx_.spectral_bound();
}

void KrylovStepper::advance(Wavefunction& psi, double duration) {
  require(duration >= 0, Errc::PreconditionViolation, "negative propagation time");
  const double h = ctx_.h();
  double remaining = duration;
  while (remaining > 0) {
    if (++steps_ > cfg_.max_steps)
      fail(Errc::NoConvergence, "propagator exceeded max_steps");
    const KrylovBasis kb = lanczos(ctx_, psi, cfg_.krylov_dim);
    const int m = static_cast<int>(kb.lambda.size());
    const bool capped = tau_guess_ >= remaining;
    double tau = std::min(tau_guess_, remaining);
    double err = local_error(kb, tau, h);
    int shrink = 0;
    while (err > cfg_.tol) {
      if (++shrink > 60) fail(Errc::NoConvergence, "Krylov step cannot meet the tolerance", err);
      tau *= std::clamp(0.9 * std::pow(cfg_.tol / err, 1.0 / m), 0.1, 0.5);
      err = local_error(kb, tau, h);
    }
    psi = krylov_exponential(kb, tau, h);
    // Step-size control: grow when the estimate leaves room, but do not let a
    // snapshot-limited step shrink the guess.
    const double grow =
        err > 0 ? std::clamp(0.9 * std::pow(cfg_.tol / err, 1.0 / m), 0.5, 2.0) : 2.0;
    if (!(capped && shrink == 0)) tau_guess_ = tau * grow;
    else tau_guess_ = std::max(tau_guess_, tau * grow);
    remaining = (tau == remaining) ? 0.0 : remaining - tau;
  }
}

namespace {

FlowTrace run_flow(const MagOperatorContext& ctx, const Wavefunction& psi0, double t_final,
                   const PropagatorConfig& cfg, std::span<const double> snapshot_times,
                   bool stop_on_escape) {
  require(psi0.spec() == ctx.spec(), Errc::GridMismatch, "initial state grid differs");
  require(t_final >= 0, Errc::PreconditionViolation, "t_final must be nonnegative");
  for (std::size_t i = 0; i < snapshot_times.size(); ++i) {
    require(snapshot_times[i] >= 0 && snapshot_times[i] <= t_final,
            Errc::PreconditionViolation, "snapshot time outside [0, t_final]");
    require(i == 0 || snapshot_times[i] > snapshot_times[i - 1], Errc::PreconditionViolation,
            "snapshot times must be strictly ascending");
  }
  if (boundary_mass(psi0, 0.1) > kFlowBoundaryLimit)
    fail(Errc::UnresolvedState, "initial state is not resolved in the box");

  FlowTrace trace;
  trace.times.push_back(0.0);
  trace.states.push_back(psi0);
  trace.norm_drift.push_back(0.0);
  const double n0 = l2_norm(psi0);

  KrylovStepper stepper(ctx, cfg);
  Wavefunction psi = psi0;
  double t = 0;
  for (double ts : snapshot_times) {
    if (ts == 0.0) continue;
    stepper.advance(psi, ts - t);
    t = ts;
    trace.steps = stepper.steps();
    if (boundary_mass(psi, 0.1) > kFlowBoundaryLimit) {
      if (stop_on_escape) {
        trace.escaped = true;
        return trace;
      }
      fail(Errc::UnresolvedState, "flow state reached the box edge");
    }
    trace.times.push_back(ts);
    trace.states.push_back(psi);
    trace.norm_drift.push_back(std::abs(l2_norm(psi) - n0));
  }
  return trace;
}

} // namespace

FlowTrace evolve(const MagOperatorContext& ctx, const Wavefunction& psi0, double t_final,
                 const PropagatorConfig& cfg, std::span<const double> snapshot_times) {
  return run_flow(ctx, psi0, t_final, cfg, snapshot_times, false);
}

FlowTrace evolve_until_escape(const MagOperatorContext& ctx, const Wavefunction& psi0,
                              double t_final, const PropagatorConfig& cfg,
                              std::span<const double> snapshot_times) {
  return run_flow(ctx, psi0, t_final, cfg, snapshot_times, true);
}

double unitarity_drift(const FlowTrace& trace) {
  double worst = 0;
  for (double d : trace.norm_drift) worst = std::max(worst, d);
  return worst;
}

double duhamel_residual(const MagOperatorContext& ctx, const Wavefunction& psi0, int j, double t,
                        const PropagatorConfig& cfg, int quadrature_nodes,
                        std::optional<cplx> c) {
  require(j >= 0 && j < ctx.spec().dim, Errc::PreconditionViolation, "axis out of range");
  require(quadrature_nodes >= 1, Errc::PreconditionViolation, "need at least one node");
  require(t >= 0, Errc::PreconditionViolation, "t must be nonnegative");
  const cplx coeff = c ? *c : duhamel_constant(ctx.spec().dim, j, ctx.h());
  const RealField xj = coordinate_field(ctx.spec(), j);
  if (t == 0.0) return 0.0;

  // One forward pass: rhs accumulates U(t - s) c L_j psi(s) node by node.
  const QuadratureRule rule = gauss_legendre(quadrature_nodes, 0.0, t);
  KrylovStepper psi_stepper(ctx, cfg), rhs_stepper(ctx, cfg);
  Wavefunction psi = psi0;
  Wavefunction rhs = multiply(xj, psi0);
  double s = 0;
  for (int q = 0; q < quadrature_nodes; ++q) {
    const double dt = rule.nodes[q] - s;
    psi_stepper.advance(psi, dt);
    rhs_stepper.advance(rhs, dt);
    s = rule.nodes[q];
    if (boundary_mass(psi, 0.1) > kFlowBoundaryLimit)
      fail(Errc::UnresolvedState, "flow state reached the box edge");
    rhs.axpy(coeff * rule.weights[q], apply_L(ctx, j, psi));
  }
  psi_stepper.advance(psi, t - s);
  rhs_stepper.advance(rhs, t - s);
  const Wavefunction lhs = multiply(xj, psi);
  const double scale = l2_norm(lhs);
  if (scale == 0.0) fail(Errc::ZeroState, "x_j psi(t) vanishes");
  return l2_norm(lhs - rhs) / scale;
}

} // namespace maglab
