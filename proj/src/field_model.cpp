#include "maglab/field_model.hpp"

#include "maglab/error.hpp"
#include "maglab/jet.hpp"
#include "maglab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace maglab {

namespace {

constexpr int kRadialNodes = 32;

Polynomial partial(Polynomial p, std::span<const int> alpha) {
  for (std::size_t a = 0; a < alpha.size(); ++a)
    for (int m = 0; m < alpha[a]; ++m) p = p.derivative(static_cast<int>(a));
  return p;
}

int order_of(std::span<const int> alpha) {
  int s = 0;
  for (int a : alpha) s += a;
  return s;
}

double coefficient_scale(const PolyMatrix& B) {
  double s = 1.0;
  for (const auto& p : B.entries) s = std::max(s, p.max_abs_coeff());
  return s;
}

const QuadratureRule& radial_rule() {
  static const QuadratureRule rule = gauss_legendre(kRadialNodes, 0.0, 1.0);
  return rule;
}

// d^m/dy^m sin(y)
double sin_derivative(int m, double y) { return std::sin(y + 0.5 * m * std::numbers::pi); }

} // namespace

FieldModel FieldModel::polynomial(const PolyMatrix& B, double b0) {
  FieldModel m;
  m.dim_ = B.dim;
  m.b0_ = b0;
  m.tag_ = "polynomial";
  m.A_poly_ = gauge_from_field(B);
  m.B_poly_ = B;
  return m;
}

FieldModel FieldModel::constant2d(double b) {
  PolyMatrix B(2);
  B.at(0, 1) = Polynomial::constant(2, b);
  B.at(1, 0) = Polynomial::constant(2, -b);
  FieldModel m = polynomial(B, std::abs(b));
  m.tag_ = "constant2d";
  return m;
}

FieldModel FieldModel::perturbed2d(double b, double eps, double omega, double box_half_width) {
  require(std::abs(eps) < 1.0, Errc::PreconditionViolation, "perturbed2d needs |eps| < 1");
  require(box_half_width > 0, Errc::PreconditionViolation, "perturbed2d needs a positive box");
  FieldModel m = constant2d(b);
  m.tag_ = "perturbed2d";
  m.b0_ = std::abs(b) * (1.0 - std::abs(eps));
  if (eps != 0.0) m.pert_ = Perturbation{b * eps, omega * std::numbers::pi / box_half_width};
  return m;
}

FieldModel FieldModel::constant4d(double b1, double b2) {
  PolyMatrix B(4);
  B.at(0, 1) = Polynomial::constant(4, b1);
  B.at(1, 0) = Polynomial::constant(4, -b1);
  B.at(2, 3) = Polynomial::constant(4, b2);
  B.at(3, 2) = Polynomial::constant(4, -b2);
  FieldModel m = polynomial(B, std::abs(b1) + std::abs(b2));
  m.tag_ = "constant4d";
  return m;
}

FieldModel FieldModel::free(int d) {
  require(d >= 1, Errc::PreconditionViolation, "free model needs d >= 1");
  FieldModel m = polynomial(PolyMatrix(d), 0.0);
  m.tag_ = "free";
  return m;
}

FieldModel FieldModel::with_gauge(const Polynomial& chi) const {
  require(chi.dim() == dim_, Errc::PreconditionViolation, "gauge function has wrong dimension");
  FieldModel m = *this;
  for (int j = 0; j < dim_; ++j) m.A_poly_[j] += chi.derivative(j);
  return m;
}

double FieldModel::perturbation_B(std::span<const double> x, std::span<const int> alpha) const {
  const double k = pert_->wavenumber;
  return pert_->amplitude * std::pow(k, order_of(alpha)) * sin_derivative(alpha[0], k * x[0]) *
         sin_derivative(alpha[1], k * x[1]);
}

std::vector<double> FieldModel::eval_A(std::span<const double> x) const {
  std::vector<double> A(dim_);
  for (int j = 0; j < dim_; ++j) A[j] = A_poly_[j].evaluate(x);
  if (pert_) {
    const auto& rule = radial_rule();
    double G = 0;
    for (int q = 0; q < kRadialNodes; ++q) {
      const double t = rule.nodes[q];
      G += rule.weights[q] * t * std::sin(pert_->wavenumber * t * x[0]) *
           std::sin(pert_->wavenumber * t * x[1]);
    }
    G *= pert_->amplitude;
    A[0] -= x[1] * G;
    A[1] += x[0] * G;
  }
  return A;
}

double FieldModel::eval_dA(std::span<const double> x, std::span<const int> alpha, int j) const {
  require(static_cast<int>(alpha.size()) == dim_ && j >= 0 && j < dim_,
          Errc::PreconditionViolation, "eval_dA index out of range");
  const int order = order_of(alpha);
  if (order > kMaxFieldDerivative)
    fail(Errc::DerivativeOrderExceeded, "eval_dA order above the closed-form limit");
  double value = partial(A_poly_[j], alpha).evaluate(x);
  if (pert_) {
    // Radial gauge of the perturbation, A = G (-x_2, x_1) with
    // G(x) = int_0^1 t g(t x) dt, differentiated through jets.
    auto space = JetSpace::get(2, order);
    const Jet X0 = Jet::variable(space.get(), 0, x[0]);
    const Jet X1 = Jet::variable(space.get(), 1, x[1]);
    const auto& rule = radial_rule();
    Jet G(space.get());
    for (int q = 0; q < kRadialNodes; ++q) {
      const double t = rule.nodes[q];
      const double kt = pert_->wavenumber * t;
      G += sin(X0 * kt) * sin(X1 * kt) * (rule.weights[q] * t);
    }
    G *= pert_->amplitude;
    const Jet comp = (j == 0) ? -(X1 * G) : X0 * G;
    value += comp.derivative(alpha);
  }
  return value;
}

double FieldModel::eval_dB(std::span<const double> x, std::span<const int> alpha, int j,
                           int k) const {
  require(static_cast<int>(alpha.size()) == dim_ && j >= 0 && j < dim_ && k >= 0 && k < dim_,
          Errc::PreconditionViolation, "eval_dB index out of range");
  if (order_of(alpha) > kMaxFieldDerivative)
    fail(Errc::DerivativeOrderExceeded, "eval_dB order above the closed-form limit");
  double value = partial(B_poly_.at(j, k), alpha).evaluate(x);
  if (pert_ && j != k) value += (j == 0 ? 1.0 : -1.0) * perturbation_B(x, alpha);
  return value;
}

Eigen::MatrixXd FieldModel::eval_B(std::span<const double> x) const {
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(dim_, dim_);
  std::vector<int> zero(dim_, 0);
  for (int j = 0; j < dim_; ++j)
    for (int k = j + 1; k < dim_; ++k) {
      B(j, k) = eval_dB(x, zero, j, k);
      B(k, j) = -B(j, k);
    }
  return B;
}

RealField FieldModel::sample_A(const GridSpec& spec, int j) const {
  require(spec.dim == dim_, Errc::GridMismatch, "grid dimension differs from the field model");
  RealField out(spec.size());
  if (!pert_) {
    for_each_node(spec, [&](std::size_t i, std::span<const double> x) {
      out[i] = A_poly_[j].evaluate(x);
    });
    return out;
  }
  for_each_node(spec, [&](std::size_t i, std::span<const double> x) { out[i] = eval_A(x)[j]; });
  return out;
}

RealField FieldModel::sample_dB(const GridSpec& spec, std::span<const int> alpha, int j,
                                int k) const {
  require(spec.dim == dim_, Errc::GridMismatch, "grid dimension differs from the field model");
  RealField out(spec.size());
  for_each_node(spec, [&](std::size_t i, std::span<const double> x) {
    out[i] = eval_dB(x, alpha, j, k);
  });
  return out;
}

RealField FieldModel::sample_trace_plus(const GridSpec& spec) const {
  require(spec.dim == dim_, Errc::GridMismatch, "grid dimension differs from the field model");
  RealField out(spec.size());
  for_each_node(spec, [&](std::size_t i, std::span<const double> x) {
    out[i] = trace_plus(eval_B(x));
  });
  return out;
}

double trace_plus(const Eigen::MatrixXd& M) {
  require(M.rows() == M.cols(), Errc::NotAntisymmetric, "trace_plus needs a square matrix");
  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  if ((M + M.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    fail(Errc::NotAntisymmetric, "trace_plus argument is not antisymmetric");
  if (M.rows() == 2) return std::abs(M(0, 1));
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  return 0.5 * svd.singularValues().sum();
}

PolyMatrix curl(std::span<const Polynomial> A) {
  const int d = static_cast<int>(A.size());
  PolyMatrix B(d);
  for (int j = 0; j < d; ++j)
    for (int k = 0; k < d; ++k)
      if (j != k) B.at(j, k) = A[k].derivative(j) - A[j].derivative(k);
  return B;
}

std::vector<Polynomial> gauge_from_field(const PolyMatrix& B) {
  const int d = B.dim;
  const double scale = coefficient_scale(B);
  for (int j = 0; j < d; ++j)
    for (int k = j; k < d; ++k)
      if ((B.at(j, k) + B.at(k, j)).max_abs_coeff() > 1e-12 * scale)
        fail(Errc::NotAntisymmetric, "field matrix is not antisymmetric");
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j)
      for (int k = j + 1; k < d; ++k) {
        const Polynomial cyc =
            B.at(j, k).derivative(i) + B.at(k, i).derivative(j) + B.at(i, j).derivative(k);
        if (cyc.max_abs_coeff() > 1e-10 * scale) fail(Errc::NotClosed, "field is not closed");
      }

  // int_0^1 t (t x)^beta dt = x^beta / (|beta| + 2)
  std::vector<Polynomial> A(d, Polynomial(d));
  for (int j = 0; j < d; ++j)
    for (int k = 0; k < d; ++k) {
      if (k == j) continue;
      for (const auto& [e, c] : B.at(k, j).terms()) {
        int deg = 0;
        for (int v : e) deg += v;
        Polynomial::Exponents f = e;
        f[k] += 1;
        A[j] += Polynomial::monomial(d, f, c / (deg + 2));
      }
    }

  const PolyMatrix check = curl(A);
  for (int j = 0; j < d; ++j)
    for (int k = 0; k < d; ++k)
      if ((check.at(j, k) - B.at(j, k)).max_abs_coeff() > 1e-9 * scale)
        fail(Errc::NotClosed, "radial gauge does not reproduce the field");
  return A;
}

double closedness_defect(const FieldModel& model, double R, int samples, unsigned seed) {
  const int d = model.dim();
  if (d < 3) return 0.0;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-R, R);
  std::vector<double> x(d);
  double worst = 0;
  auto dB = [&](int axis, int j, int k) {
    std::vector<int> alpha(d, 0);
    alpha[axis] = 1;
    return model.eval_dB(x, alpha, j, k);
  };
  for (int s = 0; s < samples; ++s) {
    for (auto& v : x) v = U(rng);
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j)
        for (int k = j + 1; k < d; ++k)
          worst = std::max(worst, std::abs(dB(i, j, k) + dB(j, k, i) + dB(k, i, j)));
  }
  return worst;
}

std::vector<std::vector<int>> multi_indices(int d, int order) {
  auto space = JetSpace::get(d, order);
  std::vector<std::vector<int>> out;
  for (std::size_t i = 0; i < space->size(); ++i) out.push_back(space->monomial(i));
  return out;
}

AssumptionReport check_assumption(const FieldModel& model, const GridSpec& spec, int max_order) {
  if (max_order > kMaxFieldDerivative)
    fail(Errc::DerivativeOrderExceeded, "check_assumption order above the closed-form limit");
  const int d = model.dim();
  AssumptionReport report;
  const RealField tr = model.sample_trace_plus(spec);
  report.b0_observed = *std::min_element(tr.begin(), tr.end());

  auto frobenius = [&](std::span<const int> alpha) {
    RealField sq(spec.size(), 0.0);
    for (int j = 0; j < d; ++j)
      for (int k = j + 1; k < d; ++k) {
        const RealField f = model.sample_dB(spec, alpha, j, k);
        for (std::size_t i = 0; i < sq.size(); ++i) sq[i] += 2.0 * f[i] * f[i];
      }
    for (auto& v : sq) v = std::sqrt(v);
    return sq;
  };
  const std::vector<int> zero(d, 0);
  const RealField base = frobenius(zero);

  report.alphas = multi_indices(d, max_order);
  for (const auto& alpha : report.alphas) {
    const RealField f = frobenius(alpha);
    double worst = 0;
    for (std::size_t i = 0; i < f.size(); ++i)
      worst = std::max(worst, base[i] > 0 ? f[i] / base[i]
                                          : (f[i] > 0 ? std::numeric_limits<double>::infinity()
                                                      : 0.0));
    report.ratio_bound.push_back(worst);
  }
  report.pass = report.b0_observed > 0;
  return report;
}

} // namespace maglab
