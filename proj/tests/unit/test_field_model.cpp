#include "maglab/error.hpp"
#include "maglab/field_model.hpp"
#include "maglab/jet.hpp"
#include "maglab/polynomial.hpp"
#include "maglab/quadrature.hpp"

#include <doctest.h>

#include <Eigen/QR>

#include <cmath>
#include <numbers>
#include <optional>
#include <random>

using namespace maglab;

namespace {

std::optional<Errc> code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

// Fourth-order central difference of f along `axis`.
double fd(auto&& f, std::vector<double> x, int axis, double step = 1e-3) {
  auto at = [&](double s) {
    std::vector<double> y = x;
    y[axis] += s;
    return f(y);
  };
  return (-at(2 * step) + 8 * at(step) - 8 * at(-step) + at(-2 * step)) / (12 * step);
}

} // namespace

TEST_CASE("Gauss-Legendre rules") {
  for (int n : {1, 4, 16, 32}) {
    const QuadratureRule q = gauss_legendre(n, -1.0, 2.0);
    for (int p = 0; p <= 2 * n - 1; ++p) {
      double s = 0;
      for (int i = 0; i < n; ++i) s += q.weights[i] * std::pow(q.nodes[i], p);
      const double exact = (std::pow(2.0, p + 1) - std::pow(-1.0, p + 1)) / (p + 1);
      CHECK(std::abs(s - exact) < 1e-12 * std::max(1.0, std::abs(exact)));
    }
    for (int i = 1; i < n; ++i) CHECK(q.nodes[i] > q.nodes[i - 1]);
  }
}

TEST_CASE("jets differentiate compositions") {
  auto space = JetSpace::get(2, 4);
  const Jet x = Jet::variable(space.get(), 0, 0.3), y = Jet::variable(space.get(), 1, -0.7);
  const Jet f = sin(x * y) + 2.0 * x * x * y;
  const double xv = 0.3, yv = -0.7;
  // d^2/dx dy of sin(xy) + 2 x^2 y = cos(xy) - xy sin(xy) + 4x
  const std::vector<int> a11{1, 1};
  CHECK(f.derivative(a11) ==
        doctest::Approx(std::cos(xv * yv) - xv * yv * std::sin(xv * yv) + 4 * xv).epsilon(1e-13));
  // d^3/dx^3 = -y^3 cos(xy)
  const std::vector<int> a30{3, 0};
  CHECK(f.derivative(a30) == doctest::Approx(-yv * yv * yv * std::cos(xv * yv)).epsilon(1e-13));
}

TEST_CASE("polynomials") {
  const Polynomial x = Polynomial::variable(2, 0), y = Polynomial::variable(2, 1);
  const Polynomial p = 3.0 * x * x * y - y + Polynomial::constant(2, 2.0);
  const std::vector<double> pt{1.5, -2.0};
  CHECK(p.evaluate(pt) == doctest::Approx(3 * 2.25 * -2.0 + 2.0 + 2.0));
  CHECK(p.degree() == 3);
  CHECK(p.derivative(0).evaluate(pt) == doctest::Approx(6 * 1.5 * -2.0));
  CHECK((p - p).is_zero());
}

TEST_CASE("constant field in the symmetric gauge") {
  const FieldModel m = FieldModel::constant2d(1.0);
  const std::vector<double> x{2.0, 0.0};
  const auto A = m.eval_A(x);
  CHECK(A[0] == doctest::Approx(0.0));
  CHECK(A[1] == doctest::Approx(1.0));
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-5, 5);
  const std::vector<int> d1{1, 0};
  for (int i = 0; i < 10; ++i) {
    const std::vector<double> p{u(rng), u(rng)};
    CHECK(m.eval_dA(p, d1, 1) == doctest::Approx(0.5));
  }
  const FieldModel m3 = FieldModel::constant2d(3.0);
  for (int i = 0; i < 10; ++i) {
    const std::vector<double> p{u(rng), u(rng)};
    CHECK(m3.eval_B(p)(0, 1) == 3.0);
    CHECK(m3.eval_B(p)(1, 0) == -3.0);
  }
}

TEST_CASE("perturbed field") {
  const double L = 6;
  const FieldModel m = FieldModel::perturbed2d(1.0, 0.3, 1.0, L);
  const std::vector<double> origin{0.0, 0.0};
  CHECK(m.eval_A(origin)[0] == 0.0);
  CHECK(m.eval_A(origin)[1] == 0.0);

  SUBCASE("potential against an independent radial quadrature") {
    const double a = std::numbers::pi / L;
    const std::vector<double> x{1.3, -2.1};
    // A_j = sum_k x_k int_0^1 t B_kj(t x) dt, Simpson in t.
    const int n = 20000;
    double G = 0;
    for (int i = 0; i <= n; ++i) {
      const double t = static_cast<double>(i) / n;
      const double B12 = 1.0 + 0.3 * std::sin(a * t * x[0]) * std::sin(a * t * x[1]);
      G += t * B12 * (i == 0 || i == n ? 1 : (i % 2 ? 4 : 2));
    }
    G /= 3.0 * n;
    const auto A = m.eval_A(x);
    CHECK(A[0] == doctest::Approx(-x[1] * G).epsilon(1e-10));
    CHECK(A[1] == doctest::Approx(x[0] * G).epsilon(1e-10));
  }
  SUBCASE("curl of A by finite differences") {
    for (const std::vector<double>& x :
         {std::vector<double>{0.0, 0.0}, std::vector<double>{1.0, 2.0}, std::vector<double>{-3.0, 2.5}}) {
      const double d1A2 = fd([&](const std::vector<double>& y) { return m.eval_A(y)[1]; }, x, 0);
      const double d2A1 = fd([&](const std::vector<double>& y) { return m.eval_A(y)[0]; }, x, 1);
      CHECK(std::abs(d1A2 - d2A1 - m.eval_B(x)(0, 1)) < 1e-8);
    }
  }
  SUBCASE("derivatives of A and B against finite differences") {
    const std::vector<double> x{0.7, -1.4};
    for (int axis = 0; axis < 2; ++axis) {
      std::vector<int> alpha{0, 0};
      alpha[axis] = 1;
      for (int j = 0; j < 2; ++j) {
        const double num = fd([&](const std::vector<double>& y) { return m.eval_A(y)[j]; }, x, axis);
        CHECK(std::abs(m.eval_dA(x, alpha, j) - num) < 1e-8);
      }
      const double numB = fd([&](const std::vector<double>& y) { return m.eval_B(y)(0, 1); }, x, axis);
      CHECK(std::abs(m.eval_dB(x, alpha, 0, 1) - numB) < 1e-8);
    }
    const std::vector<int> a21{2, 1};
    const double a = std::numbers::pi / L;
    // d_1^2 d_2 of 0.3 sin(a x1) sin(a x2)
    CHECK(m.eval_dB(x, a21, 0, 1) ==
          doctest::Approx(-0.3 * a * a * a * std::sin(a * x[0]) * std::cos(a * x[1])).epsilon(1e-12));
  }
  SUBCASE("eps = 0 reduces to the constant field") {
    const FieldModel z = FieldModel::perturbed2d(1.0, 0.0, 1.0, L);
    const FieldModel c = FieldModel::constant2d(1.0);
    const std::vector<double> x{1.1, -0.4};
    CHECK(z.eval_A(x) == c.eval_A(x));
    CHECK(z.eval_B(x) == c.eval_B(x));
    CHECK(z.b0() == c.b0());
  }
  CHECK(closedness_defect(m, 5.0, 50, 1) < 1e-12);
  CHECK(code_of([] { FieldModel::perturbed2d(1.0, 1.5, 1.0, 6.0); }) == Errc::PreconditionViolation);
}

TEST_CASE("trace_plus") {
  Eigen::MatrixXd M(2, 2);
  M << 0, 3, -3, 0;
  CHECK(trace_plus(M) == doctest::Approx(3.0).epsilon(1e-14));
  Eigen::MatrixXd M4 = Eigen::MatrixXd::Zero(4, 4);
  M4(0, 1) = 1;
  M4(1, 0) = -1;
  M4(2, 3) = 2;
  M4(3, 2) = -2;
  CHECK(trace_plus(M4) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(trace_plus(Eigen::MatrixXd::Zero(3, 3)) == 0.0);
  M(0, 0) = 1e-3;
  CHECK(code_of([&] { trace_plus(M); }) == Errc::NotAntisymmetric);

  SUBCASE("orthogonal invariance") {
    std::mt19937 rng(5);
    std::normal_distribution<double> n(0, 1);
    for (int trial = 0; trial < 10; ++trial) {
      Eigen::MatrixXd R(4, 4), G(4, 4);
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
          R(i, j) = n(rng);
          G(i, j) = n(rng);
        }
      const Eigen::MatrixXd S = R - R.transpose();
      const Eigen::MatrixXd Q = Eigen::HouseholderQR<Eigen::MatrixXd>(G).householderQ();
      CHECK(std::abs(trace_plus(Q.transpose() * S * Q) - trace_plus(S)) < 1e-10);
    }
  }
  SUBCASE("d = 2 equals |B_12|") {
    const FieldModel m = FieldModel::perturbed2d(-1.0, 0.4, 2.0, 5.0);
    const GridSpec s = GridSpec::make(2, 5, 16);
    const RealField tp = m.sample_trace_plus(s);
    for_each_node(s, [&](std::size_t i, std::span<const double> x) {
      CHECK(tp[i] == std::abs(m.eval_B(x)(0, 1)));
    });
  }
}

TEST_CASE("radial gauge of polynomial fields") {
  SUBCASE("constant form") {
    PolyMatrix B(2);
    B.at(0, 1) = Polynomial::constant(2, 2.0);
    B.at(1, 0) = Polynomial::constant(2, -2.0);
    const auto A = gauge_from_field(B);
    const std::vector<double> x{0.5, -1.5};
    CHECK(A[0].evaluate(x) == doctest::Approx(-2.0 * x[1] / 2));
    CHECK(A[1].evaluate(x) == doctest::Approx(2.0 * x[0] / 2));
  }
  SUBCASE("zero form") {
    for (const auto& a : gauge_from_field(PolyMatrix(3))) CHECK(a.is_zero());
  }
  SUBCASE("B_12 = x_1") {
    PolyMatrix B(2);
    B.at(0, 1) = Polynomial::variable(2, 0);
    B.at(1, 0) = -1.0 * Polynomial::variable(2, 0);
    const auto A = gauge_from_field(B);
    const Polynomial expect0 = (-1.0 / 3) * Polynomial::variable(2, 0) * Polynomial::variable(2, 1);
    const Polynomial expect1 = (1.0 / 3) * Polynomial::variable(2, 0) * Polynomial::variable(2, 0);
    CHECK((A[0] - expect0).max_abs_coeff() < 1e-15);
    CHECK((A[1] - expect1).max_abs_coeff() < 1e-15);
  }
  SUBCASE("curl of the gauge recovers a random closed 3d form") {
    std::mt19937 rng(11);
    std::uniform_int_distribution<int> coef(-3, 3), ex(0, 2);
    std::vector<Polynomial> seed(3, Polynomial(3));
    for (auto& p : seed)
      for (int t = 0; t < 4; ++t) p += Polynomial::monomial(3, {ex(rng), ex(rng), ex(rng)}, coef(rng));
    const PolyMatrix B = curl(seed);
    const auto A = gauge_from_field(B);
    const PolyMatrix back = curl(A);
    std::uniform_real_distribution<double> u(-2, 2);
    double worst = 0;
    for (int s = 0; s < 100; ++s) {
      const std::vector<double> x{u(rng), u(rng), u(rng)};
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k)
          worst = std::max(worst, std::abs(back.at(j, k).evaluate(x) - B.at(j, k).evaluate(x)));
    }
    CHECK(worst < 1e-9);
  }
  SUBCASE("non-closed form is rejected") {
    PolyMatrix B(3);
    B.at(0, 1) = Polynomial::variable(3, 2);
    B.at(1, 0) = -1.0 * Polynomial::variable(3, 2);
    CHECK(code_of([&] { gauge_from_field(B); }) == Errc::NotClosed);
  }
  SUBCASE("non-antisymmetric form is rejected") {
    PolyMatrix B(2);
    B.at(0, 1) = Polynomial::constant(2, 1.0);
    CHECK(code_of([&] { gauge_from_field(B); }) == Errc::NotAntisymmetric);
  }
}

TEST_CASE("gauge change keeps B") {
  const FieldModel m = FieldModel::constant2d(1.0);
  const Polynomial chi = 0.7 * Polynomial::variable(2, 0) * Polynomial::variable(2, 1);
  const FieldModel g = m.with_gauge(chi);
  const std::vector<double> x{1.2, -0.3};
  CHECK(g.eval_B(x)(0, 1) == doctest::Approx(m.eval_B(x)(0, 1)));
  CHECK(g.eval_A(x)[0] - m.eval_A(x)[0] == doctest::Approx(0.7 * x[1]));
  CHECK(g.eval_A(x)[1] - m.eval_A(x)[1] == doctest::Approx(0.7 * x[0]));
}

TEST_CASE("field assumptions on the grid") {
  SUBCASE("constant field") {
    const AssumptionReport r = check_assumption(FieldModel::constant2d(1.0), GridSpec::make(2, 4, 32), 2);
    CHECK(r.b0_observed == doctest::Approx(1.0));
    for (std::size_t i = 0; i < r.alphas.size(); ++i) {
      int order = 0;
      for (int a : r.alphas[i]) order += a;
      if (order >= 1) CHECK(r.ratio_bound[i] == 0.0);
    }
    CHECK(r.pass);
  }
  SUBCASE("strong perturbation keeps b0 >= 1 - eps") {
    const AssumptionReport r =
        check_assumption(FieldModel::perturbed2d(1.0, 0.5, 1.0, 6.0), GridSpec::make(2, 6, 64), 1);
    CHECK(r.b0_observed >= 0.5);
  }
  SUBCASE("first-order ratios are stable under refinement") {
    const FieldModel m = FieldModel::perturbed2d(1.0, 0.3, 2.0, 6.0);
    const AssumptionReport coarse = check_assumption(m, GridSpec::make(2, 6, 64), 1);
    const AssumptionReport fine = check_assumption(m, GridSpec::make(2, 6, 128), 1);
    REQUIRE(coarse.alphas == fine.alphas);
    for (std::size_t i = 0; i < coarse.alphas.size(); ++i) {
      CHECK(std::isfinite(coarse.ratio_bound[i]));
      CHECK(std::abs(coarse.ratio_bound[i] - fine.ratio_bound[i]) <= 0.05 * fine.ratio_bound[i] + 1e-15);
    }
  }
  SUBCASE("multi-indices are graded") {
    const auto idx = multi_indices(2, 2);
    CHECK(idx.size() == 6u);
    int prev = 0;
    for (const auto& a : idx) {
      const int order = a[0] + a[1];
      CHECK(order >= prev);
      prev = order;
    }
  }
}
