#include "maglab/symbolic_checks.hpp"

#include "maglab/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace maglab {

using sym::Generator;
using sym::Kind;
using sym::Ordering;
using sym::SymPoly;

namespace {

SymPoly word_poly(const SigmaWord& sigma, std::size_t begin, std::size_t end) {
  sym::Word w;
  for (std::size_t i = begin; i < end; ++i) w.push_back(Generator::L(sigma.entries[i]));
  return SymPoly::term(1, 0, 0, std::move(w));
}

std::string sigma_string(const SigmaWord& sigma) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < sigma.size(); ++i) os << (i ? "," : "") << sigma.entries[i] + 1;
  os << ")";
  return os.str();
}

std::string term_string(const sym::TermKey& key, const sym::Rational& r) {
  SymPoly p;
  p.add(key, r);
  std::string s = p.to_string();
  if (!s.empty() && s.back() == '\n') s.pop_back();
  return s;
}

} // namespace

SymPoly leibniz_H_commutator(int d, const SigmaWord& sigma) {
  SymPoly out;
  const std::size_t p = sigma.size();
  for (std::size_t pos = 0; pos < p; ++pos) {
    const int m = sigma.entries[pos];
    SymPoly inner_comm;
    for (int j = 0; j < d; ++j) {
      const SymPoly B = SymPoly::field_B(j, m);
      if (B.is_zero()) continue;
      inner_comm += (SymPoly::L(j) * B + B * SymPoly::L(j)).scaled(1, 1, 1);
    }
    out += word_poly(sigma, 0, pos) * inner_comm * word_poly(sigma, pos + 1, p);
  }
  return sym::normal_form(out, Ordering::MultipliersLeft);
}

HLsigmaReport check_H_Lsigma_structure(int d, int n, bool verify_full) {
  require(d >= 1 && d <= 3 && n >= 0 && n <= 3, Errc::PreconditionViolation,
          "structure check limited to d <= 3, n <= 3");
  HLsigmaReport report;
  report.d = d;
  report.n = n;
  report.stated_bound = 2 * n - 2;
  report.word_bound = 2 * n;
  const SymPoly H = SymPoly::H(d);
  for (const auto& sigma : enumerate_words(d, 2 * n)) {
    ++report.words;
    const SymPoly expansion = leibniz_H_commutator(d, sigma);
    for (const auto& [key, r] : expansion.terms()) {
      ++report.terms;
      int mu = 0, lambda = 0;
      bool b_based = true;
      for (const auto& g : key.word) {
        if (g.kind() == Kind::M) {
          ++mu;
          b_based = b_based && g.is_B();
        } else if (g.kind() == Kind::L) {
          ++lambda;
        }
      }
      if (mu != 1 || !b_based || key.h_power < 1)
        fail(Errc::StructureViolation,
             "sigma " + sigma_string(sigma) + " term " + term_string(key, r));
      report.max_L_count = std::max(report.max_L_count, lambda);
    }
    if (verify_full) {
      const SymPoly direct = sym::normal_form(sym::commutator(H, word_poly(sigma, 0, sigma.size())));
      const SymPoly sorted = sym::normal_form(expansion);
      if (!(direct == sorted)) report.expansion_consistent = false;
      for (const auto& [key, r] : direct.terms())
        report.max_mu_full = std::max(report.max_mu_full, sym::classify(key).mu);
    }
  }
  report.pass = report.expansion_consistent;
  if (!report.expansion_consistent)
    fail(Errc::StructureViolation, "Leibniz expansion disagrees with the direct commutator");
  return report;
}

XalphaReport check_xalpha_commutator(int d, const std::vector<int>& alpha) {
  require(static_cast<int>(alpha.size()) == d, Errc::PreconditionViolation,
          "multi-index length must equal d");
  int order = 0;
  for (int a : alpha) {
    require(a >= 0, Errc::PreconditionViolation, "negative multi-index entry");
    order += a;
  }
  require(order <= 4, Errc::PreconditionViolation, "|alpha| <= 4 required");
  XalphaReport report;
  report.alpha = alpha;
  report.expansion = sym::normal_form(sym::commutator(SymPoly::x_power(alpha), SymPoly::H(d)));
  report.min_h_power = report.expansion.is_zero() ? 1 : std::numeric_limits<int>::max();
  for (const auto& [key, r] : report.expansion.terms()) {
    const sym::TermClass c = sym::classify(key);
    report.classes.push_back(c);
    report.max_kappa = std::max(report.max_kappa, c.kappa);
    report.max_lambda = std::max(report.max_lambda, c.lambda);
    report.min_h_power = std::min(report.min_h_power, c.h_power);
    if (c.h_power < 1 || c.kappa > order - 1 || c.lambda > 1 || c.mu != 0)
      fail(Errc::StructureViolation, "[x^alpha, H] term " + term_string(key, r));
  }
  report.pass = true;
  return report;
}

cplx coefficient_value(const sym::TermKey& key, const sym::Rational& r, double h) {
  const double v = static_cast<double>(r) * std::pow(h, key.h_power);
  return key.i_power == 1 ? cplx(0.0, v) : cplx(v, 0.0);
}

namespace {

class MultiplierCache {
public:
  explicit MultiplierCache(const MagOperatorContext& ctx) : ctx_(ctx) {}

  const RealField& get(Generator g) {
    auto it = fields_.find(g.bits());
    if (it != fields_.end()) return it->second;
    const int d = ctx_.spec().dim;
    if (g.derivative_order() > kMaxFieldDerivative)
      fail(Errc::DerivativeCapExceeded, "multiplier derivative beyond the field model limit");
    const std::vector<int> alpha = g.derivatives(d);
    RealField f;
    if (g.is_B()) {
      require(g.second_index() < d, Errc::PreconditionViolation, "B index exceeds dimension");
      f = ctx_.model().sample_dB(ctx_.spec(), alpha, g.index(), g.second_index());
    } else {
      require(g.index() < d, Errc::PreconditionViolation, "A index exceeds dimension");
      f.resize(ctx_.spec().size());
      for_each_node(ctx_.spec(), [&](std::size_t i, std::span<const double> x) {
        f[i] = ctx_.model().eval_dA(x, alpha, g.index());
      });
    }
    return fields_.emplace(g.bits(), std::move(f)).first->second;
  }

private:
  const MagOperatorContext& ctx_;
  std::map<std::uint64_t, RealField> fields_;
};

Wavefunction apply_word(const MagOperatorContext& ctx, const sym::Word& w,
                        const Wavefunction& psi, MultiplierCache& cache) {
  Wavefunction out = psi;
  for (auto it = w.rbegin(); it != w.rend(); ++it) {
    switch (it->kind()) {
    case Kind::L: out = apply_L(ctx, it->index(), out); break;
    case Kind::X:
      require(it->index() < ctx.spec().dim, Errc::PreconditionViolation,
              "X index exceeds dimension");
      out = multiply(coordinate_field(ctx.spec(), it->index()), out);
      break;
    case Kind::M: out = multiply(cache.get(*it), out); break;
    }
  }
  return out;
}

} // namespace

Wavefunction evaluate(const MagOperatorContext& ctx, const SymPoly& p, const Wavefunction& psi) {
  require(psi.spec() == ctx.spec(), Errc::GridMismatch, "state grid differs from the context");
  MultiplierCache cache(ctx);
  Wavefunction out(ctx.spec());
  for (const auto& [key, r] : p.terms())
    out.axpy(coefficient_value(key, r, ctx.h()), apply_word(ctx, key.word, psi, cache));
  return out;
}

double numeric_symbolic_crosscheck(const MagOperatorContext& ctx, const SymPoly& p,
                                   const Wavefunction& psi) {
  require(psi.spec() == ctx.spec(), Errc::GridMismatch, "state grid differs from the context");
  if (p.is_zero()) return 0.0;
  MultiplierCache cache(ctx);
  Wavefunction direct(ctx.spec());
  double scale = 0;
  for (const auto& [key, r] : p.terms()) {
    const Wavefunction t = apply_word(ctx, key.word, psi, cache);
    const cplx c = coefficient_value(key, r, ctx.h());
    scale += std::abs(c) * l2_norm(t);
    direct.axpy(c, t);
  }
  const Wavefunction normal = evaluate(ctx, sym::normal_form(p), psi);
  if (scale == 0.0) return 0.0;
  return l2_norm(direct - normal) / scale;
}

cplx duhamel_constant(int d, int j, double h) {
  const SymPoly nf = sym::normal_form(sym::commutator(SymPoly::X(j), SymPoly::H(d)));
  // Expect a single term a L_j; any other shape is a convention error.
  require(nf.size() == 1, Errc::StructureViolation, "[x_j, H] is not a single L_j term");
  const auto& [key, r] = *nf.terms().begin();
  require(key.word.size() == 1 && key.word[0] == Generator::L(j), Errc::StructureViolation,
          "[x_j, H] is not proportional to L_j");
  return cplx(0.0, 1.0 / h) * coefficient_value(key, r, h);
}

} // namespace maglab
