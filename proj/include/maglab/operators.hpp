#pragma once

#include "maglab/field_model.hpp"
#include "maglab/grid.hpp"

#include <vector>

namespace maglab {

/// Index word sigma over {0..d-1}; L_sigma = L_{sigma[0]} ... L_{sigma[p-1]},
/// applied right to left. The empty word is the identity.
struct SigmaWord {
  std::vector<int> entries;

  std::size_t size() const { return entries.size(); }
  friend bool operator==(const SigmaWord&, const SigmaWord&) = default;
};

inline constexpr int kMaxWordLength = 8;

/// All words of length 0..max_len over d letters, shortest first, then
/// lexicographic.
std::vector<SigmaWord> enumerate_words(int d, int max_len);

/// Field model, grid and h, with A_j sampled once on the nodes.
class MagOperatorContext {
public:
  MagOperatorContext(FieldModel model, GridSpec spec, double h);

  const FieldModel& model() const { return model_; }
  const GridSpec& spec() const { return spec_; }
  double h() const { return h_; }
  const RealField& A(int j) const { return A_[j]; }
  /// Upper bound for the spectrum of the grid operator:
  /// sum_j (h k_max + max |A_j|)^2.
  double spectral_bound() const { return spectral_bound_; }
  /// Fourier symbol of -ih d/dx along one axis, FFT ordering.
  std::span<const cplx> momentum_multiplier() const { return momentum_; }

private:
  FieldModel model_;
  GridSpec spec_;
  double h_;
  std::vector<RealField> A_;
  std::vector<cplx> momentum_;
  double spectral_bound_ = 0;
};

/// L_j psi = -ih d_j psi - A_j psi (0-based j).
Wavefunction apply_L(const MagOperatorContext& ctx, int j, const Wavefunction& psi);
Wavefunction apply_word(const MagOperatorContext& ctx, const SigmaWord& sigma,
                        const Wavefunction& psi);
/// H psi = sum_j L_j L_j psi.
Wavefunction apply_H(const MagOperatorContext& ctx, const Wavefunction& psi);
Wavefunction apply_H_power(const MagOperatorContext& ctx, int n, const Wavefunction& psi);

/// |<H psi, psi> - sum_j ||L_j psi||^2| / sum_j ||L_j psi||^2.
double energy_identity_residual(const MagOperatorContext& ctx, const Wavefunction& psi);

struct SolveStats {
  int iterations = 0;
  double residual = 0;
  bool preconditioned = false;
};

/// Solves H u = f by conjugate gradients to ||H u - f|| <= tol ||f||. After
/// N iterations the Fourier preconditioner (-h^2 Lap + h b0)^{-1} is switched
/// on unless disabled. Iteration cap 20 N d. Throws NoConvergence.
Wavefunction solve_H(const MagOperatorContext& ctx, const Wavefunction& f, double tol,
                     SolveStats* stats = nullptr, bool allow_preconditioner = true);

struct EigenPair {
  double value = 0;
  Wavefunction vector;
  double residual = 0;
  int iterations = 0;
};

/// Smallest eigenvalue of the grid operator by inverse iteration with
/// Rayleigh-Ritz over the iterates, to relative eigenresidual <= tol.
/// Requires dx <= sqrt(h / b0) / 4 (ResolutionTooCoarse).
EigenPair lowest_eigenpair(const MagOperatorContext& ctx, double tol);
double lowest_eigenvalue(const MagOperatorContext& ctx, double tol);

/// sum over |sigma| <= 2n of ||L_sigma psi||, divided by ||H^n psi||.
double elliptic_ratio(const MagOperatorContext& ctx, int n, const Wavefunction& psi);

/// ||<B> psi|| with <B> = (1 + |B|_F^2)^{1/2}.
double b_weighted_norm(const MagOperatorContext& ctx, const Wavefunction& psi);
/// (||psi||^2 + ||H psi||^2)^{1/2}.
double graph_norm(const MagOperatorContext& ctx, const Wavefunction& psi);

/// Coherent family member: Gaussian packet of width sqrt(h) at `center`
/// with momentum `momentum`.
Wavefunction coherent_packet(const MagOperatorContext& ctx, std::span<const double> center,
                             std::span<const double> momentum);

} // namespace maglab
