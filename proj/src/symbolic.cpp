#include "maglab/symbolic.hpp"

#include "maglab/error.hpp"

#include <random>
#include <sstream>

namespace maglab::sym {

namespace {

constexpr std::uint64_t kind_bits(Kind k) { return static_cast<std::uint64_t>(k) << 62; }

std::uint64_t derivative_bits(const std::vector<int>& alpha) {
  require(alpha.size() <= static_cast<std::size_t>(kMaxSymbolicAxes),
          Errc::DerivativeCapExceeded, "multiplier derivatives limited to 8 axes");
  std::uint64_t bits = 0;
  for (std::size_t a = 0; a < alpha.size(); ++a) {
    require(alpha[a] >= 0 && alpha[a] <= 15, Errc::DerivativeCapExceeded,
            "multiplier derivative order out of range");
    bits |= static_cast<std::uint64_t>(alpha[a]) << (28 - 4 * a);
  }
  return bits;
}

void check_index(int j) {
  require(j >= 0 && j < 256, Errc::PreconditionViolation, "generator index out of range");
}

} // namespace

Generator Generator::L(int j) {
  check_index(j);
  return Generator(kind_bits(Kind::L) | (static_cast<std::uint64_t>(j) << 52));
}

Generator Generator::X(int j) {
  check_index(j);
  return Generator(kind_bits(Kind::X) | (static_cast<std::uint64_t>(j) << 52));
}

Generator Generator::A(int j, const std::vector<int>& alpha) {
  check_index(j);
  return Generator(kind_bits(Kind::M) | (static_cast<std::uint64_t>(j) << 52) |
                   derivative_bits(alpha));
}

Generator Generator::B(int j, int k, const std::vector<int>& alpha) {
  check_index(j);
  check_index(k);
  require(j < k, Errc::PreconditionViolation, "B generator needs j < k");
  return Generator(kind_bits(Kind::M) | (static_cast<std::uint64_t>(j) << 52) |
                   (std::uint64_t{1} << 48) | (static_cast<std::uint64_t>(k) << 40) |
                   derivative_bits(alpha));
}

int Generator::derivative_order() const {
  int s = 0;
  for (int a = 0; a < kMaxSymbolicAxes; ++a) s += derivative(a);
  return s;
}

std::vector<int> Generator::derivatives(int d) const {
  std::vector<int> out(d, 0);
  for (int a = 0; a < d && a < kMaxSymbolicAxes; ++a) out[a] = derivative(a);
  return out;
}

Generator Generator::differentiated(int axis, int cap) const {
  require(kind() == Kind::M, Errc::PreconditionViolation, "only multipliers are differentiated");
  if (axis < 0 || axis >= kMaxSymbolicAxes)
    fail(Errc::DerivativeCapExceeded, "multiplier derivatives limited to 8 axes");
  if (derivative_order() + 1 > cap || derivative(axis) == 15)
    fail(Errc::DerivativeCapExceeded, "multiplier derivative order exceeds the cap");
  return Generator(bits_ + (std::uint64_t{1} << (28 - 4 * axis)));
}

std::string Generator::to_string() const {
  std::ostringstream os;
  switch (kind()) {
  case Kind::L:
    os << "L_" << index() + 1;
    break;
  case Kind::X:
    os << "X_" << index() + 1;
    break;
  case Kind::M: {
    const int order = derivative_order();
    std::ostringstream base;
    if (is_B())
      base << "B_{" << index() + 1 << second_index() + 1 << "}";
    else
      base << "A_" << index() + 1;
    os << "M[";
    if (order == 0) {
      os << base.str();
    } else {
      os << "d";
      if (order > 1) os << "^" << order;
      os << base.str() << "/";
      for (int a = 0; a < kMaxSymbolicAxes; ++a) {
        const int m = derivative(a);
        if (m == 0) continue;
        os << "dx_" << a + 1;
        if (m > 1) os << "^" << m;
      }
    }
    os << "]";
    break;
  }
  }
  return os.str();
}

SymPoly SymPoly::one() { return term(1, 0, 0, {}); }

SymPoly SymPoly::generator(Generator g) { return term(1, 0, 0, {g}); }

SymPoly SymPoly::term(Rational r, int i_power, int h_power, Word word) {
  require(h_power >= 0, Errc::PreconditionViolation, "h power must be nonnegative");
  i_power = ((i_power % 4) + 4) % 4;
  if (i_power >= 2) {
    r = -r;
    i_power -= 2;
  }
  SymPoly p;
  p.add(TermKey{std::move(word), i_power, h_power}, r);
  return p;
}

SymPoly SymPoly::L(int j) { return generator(Generator::L(j)); }
SymPoly SymPoly::X(int j) { return generator(Generator::X(j)); }

SymPoly SymPoly::field_B(int j, int k) {
  if (j == k) return {};
  if (j < k) return generator(Generator::B(j, k));
  return term(-1, 0, 0, {Generator::B(k, j)});
}

SymPoly SymPoly::H(int d) {
  SymPoly out;
  for (int j = 0; j < d; ++j) out += term(1, 0, 0, {Generator::L(j), Generator::L(j)});
  return out;
}

SymPoly SymPoly::x_power(const std::vector<int>& alpha) {
  Word w;
  for (std::size_t a = 0; a < alpha.size(); ++a)
    for (int m = 0; m < alpha[a]; ++m) w.push_back(Generator::X(static_cast<int>(a)));
  return term(1, 0, 0, std::move(w));
}

void SymPoly::add(TermKey key, const Rational& r) {
  if (r == 0) return;
  auto [it, inserted] = terms_.try_emplace(std::move(key), r);
  if (!inserted) {
    it->second += r;
    if (it->second == 0) terms_.erase(it);
  }
}

SymPoly& SymPoly::operator+=(const SymPoly& o) {
  for (const auto& [k, r] : o.terms_) add(k, r);
  return *this;
}

SymPoly& SymPoly::operator-=(const SymPoly& o) {
  for (const auto& [k, r] : o.terms_) add(k, -r);
  return *this;
}

SymPoly operator*(const SymPoly& a, const SymPoly& b) {
  SymPoly out;
  for (const auto& [ka, ra] : a.terms_)
    for (const auto& [kb, rb] : b.terms_) {
      TermKey k;
      k.word = ka.word;
      k.word.insert(k.word.end(), kb.word.begin(), kb.word.end());
      k.h_power = ka.h_power + kb.h_power;
      k.i_power = ka.i_power + kb.i_power;
      Rational r = ra * rb;
      if (k.i_power == 2) {
        k.i_power = 0;
        r = -r;
      }
      out.add(std::move(k), r);
    }
  return out;
}

SymPoly SymPoly::scaled(const Rational& r, int i_power, int h_power) const {
  return term(r, i_power, h_power, {}) * *this;
}

std::string SymPoly::to_string() const {
  if (terms_.empty()) return "0\n";
  std::ostringstream os;
  for (const auto& [k, r] : terms_) {
    const auto num = boost::multiprecision::numerator(r);
    const auto den = boost::multiprecision::denominator(r);
    os << "(" << (num < 0 ? "-" : "+") << boost::multiprecision::abs(num) << "/" << den << ")"
       << "·i^" << k.i_power << "·h^" << k.h_power << " ";
    if (k.word.empty()) {
      os << "1";
    } else {
      for (std::size_t g = 0; g < k.word.size(); ++g) {
        if (g) os << " ";
        os << k.word[g].to_string();
      }
    }
    os << "\n";
  }
  return os.str();
}

SymPoly multiply(const SymPoly& p, const SymPoly& q) { return p * q; }

SymPoly commutator(const SymPoly& p, const SymPoly& q) { return p * q - q * p; }

namespace {

bool out_of_order(Generator u, Generator v, Ordering ordering) {
  if (ordering == Ordering::Full) return u > v;
  return v.kind() == Kind::M && (u.kind() != Kind::M || u > v);
}

// Multiplies a coefficient by -ih.
void times_minus_ih(TermKey& k, Rational& r) {
  k.h_power += 1;
  if (k.i_power == 0) {
    k.i_power = 1;
    r = -r;
  } else {
    k.i_power = 0; // -i * i = 1
  }
}

// Applies the rule for the out-of-order pair at position i and feeds the
// resulting terms to `emit`.
template <class Emit>
void rewrite_at(const TermKey& key, const Rational& r, std::size_t i, int cap, Emit&& emit) {
  const Generator u = key.word[i], v = key.word[i + 1];
  TermKey swapped = key;
  std::swap(swapped.word[i], swapped.word[i + 1]);
  emit(std::move(swapped), r);

  if (u.kind() != Kind::L) return; // multipliers and positions commute
  const int j = u.index();
  TermKey extra = key;
  Rational rr = r;
  switch (v.kind()) {
  case Kind::M:
    extra.word[i] = v.differentiated(j, cap);
    extra.word.erase(extra.word.begin() + static_cast<std::ptrdiff_t>(i) + 1);
    break;
  case Kind::X:
    if (v.index() != j) return;
    extra.word.erase(extra.word.begin() + static_cast<std::ptrdiff_t>(i),
                     extra.word.begin() + static_cast<std::ptrdiff_t>(i) + 2);
    break;
  case Kind::L: {
    // L_j L_k = L_k L_j + ih B_jk = L_k L_j - ih B_kj with k < j.
    const int k = v.index();
    extra.word[i] = Generator::B(k, j);
    extra.word.erase(extra.word.begin() + static_cast<std::ptrdiff_t>(i) + 1);
    break;
  }
  }
  times_minus_ih(extra, rr);
  emit(std::move(extra), rr);
}

// First axis c < a carrying a derivative of d^alpha B_ab, or -1. Such
// symbols are rewritten with dB = 0, so the normal form does not depend on
// how a B derivative was produced (only matters for d >= 3).
int bianchi_axis(Generator g) {
  if (!g.is_B()) return -1;
  for (int c = 0; c < g.index(); ++c)
    if (g.derivative(c) > 0) return c;
  return -1;
}

// d_c B_ab = d_a B_cb - d_b B_ca for c < a < b.
template <class Emit>
void rewrite_bianchi(const TermKey& key, const Rational& r, std::size_t i, int c, Emit&& emit) {
  const Generator g = key.word[i];
  const int a = g.index(), b = g.second_index();
  std::vector<int> alpha = g.derivatives(kMaxSymbolicAxes);
  alpha[c] -= 1;
  std::vector<int> first = alpha, second = alpha;
  first[a] += 1;
  second[b] += 1;
  TermKey k1 = key, k2 = key;
  k1.word[i] = Generator::B(c, b, first);
  k2.word[i] = Generator::B(c, a, second);
  emit(std::move(k1), r);
  emit(std::move(k2), -r);
}

} // namespace

bool is_normal(const Word& w, Ordering ordering) {
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (bianchi_axis(w[i]) >= 0) return false;
    if (i + 1 < w.size() && out_of_order(w[i], w[i + 1], ordering)) return false;
  }
  return true;
}

SymPoly normal_form(const SymPoly& p, Ordering ordering, Strategy strategy, int derivative_cap) {
  std::map<TermKey, Rational> pending(p.terms().begin(), p.terms().end());
  SymPoly result;
  std::mt19937_64 rng(strategy.seed);
  std::vector<std::size_t> bad;

  auto emit = [&](TermKey k, const Rational& r) {
    if (r == 0) return;
    auto [it, inserted] = pending.try_emplace(std::move(k), r);
    if (!inserted) {
      it->second += r;
      if (it->second == 0) pending.erase(it);
    }
  };

  while (!pending.empty()) {
    auto it = pending.begin();
    if (strategy.kind == Strategy::Kind::Random && pending.size() > 1)
      std::advance(it, std::uniform_int_distribution<std::size_t>(0, pending.size() - 1)(rng));
    TermKey key = it->first;
    Rational r = it->second;
    pending.erase(it);

    bool rewritten = false;
    for (std::size_t i = 0; i < key.word.size() && !rewritten; ++i)
      if (const int c = bianchi_axis(key.word[i]); c >= 0) {
        rewrite_bianchi(key, r, i, c, emit);
        rewritten = true;
      }
    if (rewritten) continue;

    bad.clear();
    for (std::size_t i = 0; i + 1 < key.word.size(); ++i)
      if (out_of_order(key.word[i], key.word[i + 1], ordering)) {
        bad.push_back(i);
        if (strategy.kind == Strategy::Kind::Leftmost) break;
      }
    if (bad.empty()) {
      result.add(std::move(key), r);
      continue;
    }
    std::size_t pos = bad.front();
    if (strategy.kind == Strategy::Kind::Random)
      pos = bad[std::uniform_int_distribution<std::size_t>(0, bad.size() - 1)(rng)];
    rewrite_at(key, r, pos, derivative_cap, emit);
  }
  return result;
}

TermClass classify(const TermKey& term) {
  if (!is_normal(term.word, Ordering::Full))
    fail(Errc::NotNormalForm, "classify needs a normal-form term");
  TermClass c;
  c.h_power = term.h_power;
  for (const auto& g : term.word) {
    switch (g.kind()) {
    case Kind::X: ++c.kappa; break;
    case Kind::L: ++c.lambda; break;
    case Kind::M: ++c.mu; break;
    }
  }
  return c;
}

Grading grading(const TermKey& term) {
  Grading g;
  g.dh = term.h_power;
  for (const auto& x : term.word) {
    switch (x.kind()) {
    case Kind::X: g.d1 += 1; break;
    case Kind::L:
      g.dh += 1;
      g.d1 -= 1;
      break;
    case Kind::M:
      g.dh += 1;
      g.d1 -= x.derivative_order() + (x.is_B() ? 2 : 1);
      break;
    }
  }
  return g;
}

} // namespace maglab::sym
