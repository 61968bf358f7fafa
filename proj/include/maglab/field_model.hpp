#pragma once

#include "maglab/grid.hpp"
#include "maglab/polynomial.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace maglab {

/// Highest derivative order available from eval_dA / eval_dB.
inline constexpr int kMaxFieldDerivative = 6;

/// Magnetic field B = dA together with a gauge potential A. All indices are
/// 0-based. B_jk = d_j A_k - d_k A_j.
///
/// A is a polynomial part plus, for perturbed2d, the radial gauge of the
/// trigonometric perturbation. Instances are immutable.
class FieldModel {
public:
  static FieldModel constant2d(double b);
  /// B_12 = b (1 + eps sin(a x_1) sin(a x_2)), a = omega pi / box_half_width.
  static FieldModel perturbed2d(double b, double eps, double omega, double box_half_width);
  /// Block-diagonal: B_12 = b1, B_34 = b2.
  static FieldModel constant4d(double b1, double b2);
  /// A = 0 in dimension d.
  static FieldModel free(int d);
  /// Polynomial field with A from gauge_from_field.
  static FieldModel polynomial(const PolyMatrix& B, double b0);

  /// Same field, potential A + grad chi.
  FieldModel with_gauge(const Polynomial& chi) const;

  int dim() const { return dim_; }
  double b0() const { return b0_; }
  const std::string& tag() const { return tag_; }

  std::vector<double> eval_A(std::span<const double> x) const;
  double eval_dA(std::span<const double> x, std::span<const int> alpha, int j) const;
  Eigen::MatrixXd eval_B(std::span<const double> x) const;
  double eval_dB(std::span<const double> x, std::span<const int> alpha, int j, int k) const;

  RealField sample_A(const GridSpec& spec, int j) const;
  RealField sample_dB(const GridSpec& spec, std::span<const int> alpha, int j, int k) const;
  /// Tr+B at every node.
  RealField sample_trace_plus(const GridSpec& spec) const;

private:
  FieldModel() = default;

  struct Perturbation {
    double amplitude; // b * eps
    double wavenumber;
  };

  double perturbation_B(std::span<const double> x, std::span<const int> alpha) const;

  int dim_ = 0;
  double b0_ = 0;
  std::string tag_;
  std::vector<Polynomial> A_poly_;
  PolyMatrix B_poly_;
  std::optional<Perturbation> pert_;
};

/// Sum of the moduli of the eigenvalues with positive imaginary part,
/// computed as half the sum of singular values. Throws NotAntisymmetric.
double trace_plus(const Eigen::MatrixXd& M);

/// Radial (Poincare) gauge A_j(x) = sum_k x_k int_0^1 t B_kj(t x) dt for a
/// polynomial closed 2-form, in closed form. Throws NotAntisymmetric or
/// NotClosed.
std::vector<Polynomial> gauge_from_field(const PolyMatrix& B);

/// Exterior derivative of a polynomial 1-form.
PolyMatrix curl(std::span<const Polynomial> A);

/// Largest |d_i B_jk + d_j B_ki + d_k B_ij| over random points in [-R, R]^d.
double closedness_defect(const FieldModel& model, double R, int samples, unsigned seed);

struct AssumptionReport {
  double b0_observed = 0;
  /// One entry per multi-index with |alpha| <= max_order, in graded order.
  std::vector<std::vector<int>> alphas;
  std::vector<double> ratio_bound;
  bool pass = false;
};

/// Grid check of the field assumptions: min of Tr+B and the ratios
/// max ||d^alpha B||_F / ||B||_F.
AssumptionReport check_assumption(const FieldModel& model, const GridSpec& spec, int max_order);

/// All multi-indices in d variables with |alpha| <= order, graded.
std::vector<std::vector<int>> multi_indices(int d, int order);

} // namespace maglab
