#include "maglab/error.hpp"
#include "maglab/fit.hpp"
#include "maglab/operators.hpp"

#include <doctest.h>

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

double max_diff(const Wavefunction& a, const Wavefunction& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Sum of a few Gaussians with random centers, widths, momenta and amplitudes,
// all well inside the box and resolved on the grid.
Wavefunction random_localized(const GridSpec& spec, double h, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> pos(-1.0, 1.0), width(0.4, 0.55), mom(-0.3, 0.3),
      amp(-1, 1);
  Wavefunction psi(spec);
  for (int g = 0; g < 5; ++g) {
    std::vector<double> c(spec.dim), xi(spec.dim);
    for (int a = 0; a < spec.dim; ++a) {
      c[a] = pos(rng);
      xi[a] = mom(rng);
    }
    psi.axpy(cplx(amp(rng), amp(rng)), gaussian_packet(spec, c, xi, width(rng), h));
  }
  return psi;
}

} // namespace

TEST_CASE("plane wave in zero field") {
  const double L = 4, h = 0.1;
  const MagOperatorContext ctx(FieldModel::free(2), GridSpec::make(2, L, 64), h);
  Wavefunction psi(ctx.spec());
  for_each_node(ctx.spec(), [&](std::size_t i, std::span<const double> x) {
    psi[i] = std::polar(1.0, std::numbers::pi * x[0] / L);
  });
  const double p = h * std::numbers::pi / L;
  CHECK(max_diff(apply_L(ctx, 0, psi), cplx(p) * psi) < 1e-12);
  CHECK(l2_norm(apply_L(ctx, 1, psi)) < 1e-12);
  CHECK(max_diff(apply_H(ctx, psi), cplx(p * p) * psi) < 1e-12);
}

TEST_CASE("word enumeration") {
  const auto w = enumerate_words(2, 2);
  REQUIRE(w.size() == 7u);
  CHECK(w[0].size() == 0u);
  CHECK(w[1].entries == std::vector<int>{0});
  CHECK(w[3].entries == std::vector<int>{0, 0});
  CHECK(w[6].entries == std::vector<int>{1, 1});
}

TEST_CASE("magnetic operators on a constant field") {
  const double h = 0.1;
  const MagOperatorContext ctx(FieldModel::constant2d(1.0), GridSpec::make(2, 5, 128), h);
  const Wavefunction a = random_localized(ctx.spec(), h, 1), b = random_localized(ctx.spec(), h, 2);

  SUBCASE("L_j is symmetric") {
    for (int j = 0; j < 2; ++j) {
      const cplx lhs = inner(apply_L(ctx, j, a), b), rhs = inner(a, apply_L(ctx, j, b));
      CHECK(std::abs(lhs - rhs) < 1e-10 * l2_norm(a) * l2_norm(b));
    }
  }
  SUBCASE("commutator gives the field") {
    const Wavefunction c = apply_word(ctx, SigmaWord{{0, 1}}, a) - apply_word(ctx, SigmaWord{{1, 0}}, a);
    // [L_1, L_2] = ih B_12
    CHECK(max_diff(c, cplx(0, h) * a) < 1e-9);
  }
  SUBCASE("empty word and powers") {
    CHECK(max_diff(apply_word(ctx, SigmaWord{}, a), a) == 0.0);
    CHECK(max_diff(apply_H_power(ctx, 0, a), a) == 0.0);
    CHECK(max_diff(apply_H_power(ctx, 2, a), apply_H(ctx, apply_H(ctx, a))) == 0.0);
    CHECK(code_of([&] { apply_H_power(ctx, -1, a); }) == Errc::PreconditionViolation);
  }
  SUBCASE("energy identity") {
    for (unsigned seed = 10; seed < 20; ++seed) {
      const Wavefunction psi = random_localized(ctx.spec(), h, seed);
      CHECK(energy_identity_residual(ctx, psi) < 1e-8);
    }
    const std::vector<double> c{0.3, -0.2}, xi{0.1, 0.2};
    CHECK(energy_identity_residual(ctx, gaussian_packet(ctx.spec(), c, xi, 0.5, h)) < 1e-9);
  }
  SUBCASE("energy lower bound h b0") {
    for (unsigned seed = 30; seed < 40; ++seed) {
      const Wavefunction psi = random_localized(ctx.spec(), h, seed);
      const double q = inner(apply_H(ctx, psi), psi).real();
      const double n = l2_norm(psi);
      CHECK(q >= h * 1.0 * n * n * (1 - 1e-8));
    }
  }
  SUBCASE("grid mismatch") {
    CHECK(code_of([&] { apply_L(ctx, 0, Wavefunction(GridSpec::make(2, 5, 64))); }) ==
          Errc::GridMismatch);
  }
}

TEST_CASE("energy identity on a Fourier mode") {
  const double L = 4, h = 0.1;
  const MagOperatorContext ctx(FieldModel::free(2), GridSpec::make(2, L, 32), h);
  Wavefunction psi(ctx.spec());
  for_each_node(ctx.spec(), [&](std::size_t i, std::span<const double> x) {
    psi[i] = std::polar(1.0, std::numbers::pi * (2 * x[0] - 3 * x[1]) / L);
  });
  CHECK(energy_identity_residual(ctx, psi) < 1e-13);
}

TEST_CASE("solving H u = f") {
  const double h = 0.1, b = 1.0;
  const MagOperatorContext ctx(FieldModel::constant2d(b), GridSpec::make(2, 5, 128), h);
  const std::vector<double> c{0.2, -0.1}, xi{0.0, 0.0};
  const Wavefunction f = gaussian_packet(ctx.spec(), c, xi, 0.6, h);
  for (double tol : {1e-6, 1e-10}) {
    SolveStats st;
    const Wavefunction u = solve_H(ctx, f, tol, &st);
    CHECK(l2_norm(apply_H(ctx, u) - f) <= 10 * tol * l2_norm(f));
    CHECK(st.residual <= tol);
    // H >= h b, so ||u|| <= ||f|| / (h b).
    CHECK(l2_norm(u) <= l2_norm(f) / (h * b) * (1 + 5 * tol));
  }
  CHECK(l2_norm(solve_H(ctx, Wavefunction(ctx.spec()), 1e-8)) == 0.0);
  CHECK(code_of([&] { solve_H(ctx, f, 1e-20); }) == Errc::PreconditionViolation);
  CHECK(code_of([&] { solve_H(ctx, f, 1e-3); }) == Errc::PreconditionViolation);
}

TEST_CASE("lowest Landau level") {
  // L = 6 keeps the grid inside the resolution guard at h = 0.1.
  for (double b : {1.0, 2.0}) {
    const double h = 0.1;
    const MagOperatorContext ctx(FieldModel::constant2d(b), GridSpec::make(2, 6, 256), h);
    const EigenPair e = lowest_eigenpair(ctx, 1e-8);
    CHECK(std::abs(e.value - h * b) <= 5e-3 * h * b);
    CHECK(e.residual <= 1e-8);
    CHECK(std::abs(l2_norm(e.vector) - 1.0) < 1e-10);
  }
  const MagOperatorContext coarse(FieldModel::constant2d(1.0), GridSpec::make(2, 6, 64), 0.1);
  CHECK(code_of([&] { lowest_eigenvalue(coarse, 1e-8); }) == Errc::ResolutionTooCoarse);
}

TEST_CASE("elliptic ratio") {
  const double h = 0.1;
  const MagOperatorContext ctx(FieldModel::constant2d(1.0), GridSpec::make(2, 4, 128), h);
  const std::vector<double> c{0.0, 0.0}, xi{0.2, -0.1};
  const Wavefunction psi = coherent_packet(ctx, c, xi);
  CHECK(elliptic_ratio(ctx, 0, psi) == doctest::Approx(1.0).epsilon(1e-14));

  SUBCASE("gauge invariance") {
    const double k = 0.2;
    const Polynomial chi = k * Polynomial::variable(2, 0) * Polynomial::variable(2, 1);
    const MagOperatorContext g(ctx.model().with_gauge(chi), ctx.spec(), h);
    Wavefunction phi = psi;
    for_each_node(ctx.spec(), [&](std::size_t i, std::span<const double> x) {
      phi[i] *= std::polar(1.0, k * x[0] * x[1] / h);
    });
    for (int n : {1, 2}) {
      const double r0 = elliptic_ratio(ctx, n, psi), r1 = elliptic_ratio(g, n, phi);
      CHECK(std::abs(r1 - r0) < 1e-8 * r0);
    }
  }
  SUBCASE("second-order words are controlled by H") {
    // ||L_j L_k psi|| / ||H psi|| must stay bounded as h shrinks.
    std::vector<double> inv_h, worst;
    for (double hh : {0.2, 0.14, 0.1, 0.07, 0.05}) {
      const MagOperatorContext c2(FieldModel::constant2d(1.0), GridSpec::make(2, 4, 256), hh);
      const Wavefunction p = coherent_packet(c2, c, xi);
      const double Hn = l2_norm(apply_H(c2, p));
      double m = 0;
      for (int j = 0; j < 2; ++j)
        for (int kk = 0; kk < 2; ++kk)
          m = std::max(m, l2_norm(apply_word(c2, SigmaWord{{j, kk}}, p)) / Hn);
      inv_h.push_back(1 / hh);
      worst.push_back(m);
    }
    CHECK(fit_loglog_slope(inv_h, worst).slope <= 1.15);
  }
  SUBCASE("field weight against the graph norm") {
    std::vector<double> inv_h, q;
    for (double hh : {0.2, 0.1, 0.05}) {
      const MagOperatorContext c2(FieldModel::perturbed2d(1.0, 0.3, 1.0, 4.0),
                                  GridSpec::make(2, 4, 256), hh);
      const Wavefunction p = coherent_packet(c2, c, xi);
      inv_h.push_back(1 / hh);
      q.push_back(hh * b_weighted_norm(c2, p) / graph_norm(c2, p));
    }
    CHECK(fit_loglog_slope(inv_h, q).slope <= 0.15);
  }
  CHECK(code_of([&] { elliptic_ratio(ctx, 5, psi); }) == Errc::PreconditionViolation);
  CHECK(code_of([&] { elliptic_ratio(ctx, 1, Wavefunction(ctx.spec())); }) == Errc::ZeroDenominator);
}

TEST_CASE("resolvent bound for a non-eigenstate") {
  const double h = 0.1;
  const MagOperatorContext ctx(FieldModel::constant2d(1.0), GridSpec::make(2, 6, 256), h);
  const std::vector<double> c{0.5, -0.3}, xi{0.3, 0.2};
  const Wavefunction f = gaussian_packet(ctx.spec(), c, xi, 0.4, h);
  const Wavefunction u = solve_H(ctx, f, 1e-10);
  const double lambda = lowest_eigenvalue(ctx, 1e-8);
  const double ratio = weighted_l2(u, 0.0) / weighted_l2(f, 0.0);
  CHECK(ratio <= 1 / lambda * (1 + 1e-8));
  // Not an eigenstate, so the bound is strict.
  CHECK(ratio < 0.99 / lambda);
  // Weighted ratios stay finite below the admissible cap sqrt(b0 / 2h).
  for (double beta : {0.5, 1.0, 2.0}) CHECK(std::isfinite(weighted_l2(u, beta) / weighted_l2(f, beta)));
}
