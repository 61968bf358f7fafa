#pragma once

#include "maglab/operators.hpp"
#include "maglab/symbolic.hpp"

#include <string>
#include <vector>

namespace maglab {

/// [H, L_sigma] expanded by the Leibniz rule, [H, L_m] = sum_j ih (L_j B_jm + B_jm L_j),
/// with the multipliers then commuted to the left.
sym::SymPoly leibniz_H_commutator(int d, const SigmaWord& sigma);

struct HLsigmaReport {
  int d = 0;
  int n = 0;
  std::size_t words = 0;
  std::size_t terms = 0;
  /// Largest L count in the multipliers-left expansion, against the stated
  /// bound 2n - 2 and the word length bound 2n.
  int max_L_count = 0;
  int stated_bound = 0;
  int word_bound = 0;
  /// Largest multiplier count in the fully sorted normal form (informative:
  /// sorting the L's creates further B factors).
  int max_mu_full = 0;
  /// The Leibniz expansion and H L_sigma - L_sigma H agree after full normal form.
  bool expansion_consistent = true;
  bool pass = false;
};

/// For every sigma of length <= 2n, checks that each term of the
/// multipliers-left expansion of [H, L_sigma] carries exactly one multiplier,
/// a derivative of some B_kl, and h_power >= 1. Requires d <= 3, n <= 3.
/// Throws StructureViolation naming the offending sigma and term.
HLsigmaReport check_H_Lsigma_structure(int d, int n, bool verify_full = true);

struct XalphaReport {
  std::vector<int> alpha;
  sym::SymPoly expansion;
  std::vector<sym::TermClass> classes;
  int max_kappa = 0;
  int max_lambda = 0;
  int min_h_power = 0;
  bool pass = false;
};

/// Normal form of [x^alpha, H]; every term must have h_power >= 1, at most
/// |alpha| - 1 positions and at most one L. Requires |alpha| <= 4.
/// Throws StructureViolation.
XalphaReport check_xalpha_commutator(int d, const std::vector<int>& alpha);

/// Applies p to psi on the grid: M(f) multiplies by the model's f, X_j by
/// x_j, L_j is apply_L; coefficients use the context's h.
Wavefunction evaluate(const MagOperatorContext& ctx, const sym::SymPoly& p,
                      const Wavefunction& psi);

/// ||p(psi) - NF(p)(psi)|| divided by sum over terms t of p of |c_t| ||t(psi)||;
/// 0 for the zero polynomial.
double numeric_symbolic_crosscheck(const MagOperatorContext& ctx, const sym::SymPoly& p,
                                   const Wavefunction& psi);

/// The constant c in d/dt (x_j psi) = (i/h) H x_j psi + c L_j psi for
/// psi(t) = exp(i t H / h) psi0, read off the normal form of [x_j, H] as
/// (i/h) times its L_j coefficient.
cplx duhamel_constant(int d, int j, double h);

/// Evaluates a coefficient r i^a h^b at a numeric h.
cplx coefficient_value(const sym::TermKey& key, const sym::Rational& r, double h);

} // namespace maglab
