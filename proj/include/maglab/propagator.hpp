#pragma once

#include "maglab/operators.hpp"

#include <optional>
#include <vector>

namespace maglab {

struct PropagatorConfig {
  int krylov_dim = 30;
  /// Initial substep; 0 selects dt with dt * lambda_max / h = 10. Later
  /// substeps adapt to the local error estimate.
  double dt = 0.0;
  /// Local error bound per substep, relative to the state norm.
  double tol = 1e-10;
  long max_steps = 1000000;

  void validate() const;

  friend bool operator==(const PropagatorConfig&, const PropagatorConfig&) = default;
};

struct FlowTrace {
  std::vector<double> times;
  std::vector<Wavefunction> states;
  std::vector<double> norm_drift;
  long steps = 0;
  /// Set by evolve_until_escape when a snapshot left the resolved region;
  /// the trace then ends at the last resolved snapshot.
  bool escaped = false;
};

inline constexpr double kFlowBoundaryLimit = 1e-6;

/// psi(t) = exp(i t H / h) psi0 at 0 and at each snapshot time (ascending,
/// within [0, t_final]) by Lanczos substeps. Throws UnresolvedState when a
/// snapshot has boundary_mass above 1e-6, NoConvergence on step exhaustion.
FlowTrace evolve(const MagOperatorContext& ctx, const Wavefunction& psi0, double t_final,
                 const PropagatorConfig& cfg, std::span<const double> snapshot_times);

/// As evolve, but stops at the first unresolved snapshot instead of throwing.
FlowTrace evolve_until_escape(const MagOperatorContext& ctx, const Wavefunction& psi0,
                              double t_final, const PropagatorConfig& cfg,
                              std::span<const double> snapshot_times);

double unitarity_drift(const FlowTrace& trace);

/// Relative L2 mismatch of x_j psi(t) against
/// U(t) x_j psi0 + int_0^t U(t - s) c L_j psi(s) ds, with U(t) = exp(i t H / h)
/// and the integral by Gauss-Legendre. When c is not given it is taken from
/// the symbolic expansion of [x_j, H].
double duhamel_residual(const MagOperatorContext& ctx, const Wavefunction& psi0, int j, double t,
                        const PropagatorConfig& cfg, int quadrature_nodes,
                        std::optional<cplx> c = std::nullopt);

/// Incremental propagator keeping its adaptive step between calls.
class KrylovStepper {
public:
  KrylovStepper(const MagOperatorContext& ctx, const PropagatorConfig& cfg);

  /// Advances psi in place by `duration` (>= 0).
  void advance(Wavefunction& psi, double duration);
  long steps() const { return steps_; }

private:
  const MagOperatorContext& ctx_;
  PropagatorConfig cfg_;
  double tau_guess_;
  long steps_ = 0;
};

} // namespace maglab
