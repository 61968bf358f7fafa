#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <compare>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace maglab::sym {

using Rational = boost::multiprecision::cpp_rational;

enum class Kind : unsigned { M = 0, X = 1, L = 2 };

inline constexpr int kMaxSymbolicAxes = 8;
inline constexpr int kDefaultDerivativeCap = 8;

/// One generator packed in 64 bits so that the integer order is the
/// normal-form order: multipliers, then positions, then magnetic derivatives.
///
///   bits 62-63  kind
///   bits 52-59  first index (L_j, X_j, A_j, or j of B_jk)
///   bit  48     multiplier base: 0 = A component, 1 = B component
///   bits 40-47  second index k of B_jk (j < k)
///   bits  0-31  derivative counts, 4 bits per axis, axis 0 most significant
///
/// Indices are 0-based.
class Generator {
public:
  static Generator L(int j);
  static Generator X(int j);
  /// d^alpha A_j.
  static Generator A(int j, const std::vector<int>& alpha = {});
  /// d^alpha B_jk, requires j < k.
  static Generator B(int j, int k, const std::vector<int>& alpha = {});

  Kind kind() const { return static_cast<Kind>(bits_ >> 62); }
  int index() const { return static_cast<int>((bits_ >> 52) & 0xff); }
  bool is_B() const { return kind() == Kind::M && ((bits_ >> 48) & 1u); }
  bool is_A() const { return kind() == Kind::M && !((bits_ >> 48) & 1u); }
  int second_index() const { return static_cast<int>((bits_ >> 40) & 0xff); }
  int derivative(int axis) const { return static_cast<int>((bits_ >> (28 - 4 * axis)) & 0xf); }
  int derivative_order() const;
  std::vector<int> derivatives(int d) const;

  /// d_axis of this multiplier. Throws DerivativeCapExceeded above `cap`.
  Generator differentiated(int axis, int cap) const;

  std::uint64_t bits() const { return bits_; }
  auto operator<=>(const Generator&) const = default;

  /// `L_j`, `X_j`, `M[B_{jk}]`, `M[d^3B_{12}/dx_1^2dx_2]` (1-based).
  std::string to_string() const;

private:
  explicit Generator(std::uint64_t bits) : bits_(bits) {}
  std::uint64_t bits_ = 0;
};

using Word = std::vector<Generator>;

/// Monomial key: word with the i- and h-powers of its coefficient. The
/// rational part is the map value. i^2 = -1 is folded into the sign, so
/// i_power is 0 or 1.
struct TermKey {
  Word word;
  int i_power = 0;
  int h_power = 0;
  auto operator<=>(const TermKey&) const = default;
};

/// Exact polynomial in the free algebra over {L_j, X_j, M_f} with
/// coefficients in Q[i, h]. Like terms are merged and zeros dropped, so two
/// polynomials are equal iff their term maps are equal.
class SymPoly {
public:
  SymPoly() = default;

  static SymPoly one();
  static SymPoly generator(Generator g);
  static SymPoly term(Rational r, int i_power, int h_power, Word word);
  /// L_j, X_j (0-based).
  static SymPoly L(int j);
  static SymPoly X(int j);
  /// B_jk for any j != k, antisymmetry absorbed into the sign.
  static SymPoly field_B(int j, int k);
  /// H = sum_j L_j^2 in dimension d.
  static SymPoly H(int d);
  /// x^alpha.
  static SymPoly x_power(const std::vector<int>& alpha);

  void add(TermKey key, const Rational& r);

  const std::map<TermKey, Rational>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  SymPoly& operator+=(const SymPoly& o);
  SymPoly& operator-=(const SymPoly& o);
  friend SymPoly operator+(SymPoly a, const SymPoly& b) { return a += b; }
  friend SymPoly operator-(SymPoly a, const SymPoly& b) { return a -= b; }
  friend SymPoly operator*(const SymPoly& a, const SymPoly& b);
  /// Scalar r * i^a * h^b.
  SymPoly scaled(const Rational& r, int i_power = 0, int h_power = 0) const;

  friend bool operator==(const SymPoly&, const SymPoly&) = default;

  /// One term per line, canonical order: `(+p/q)·i^a·h^b W`, word `1` if empty.
  /// The zero polynomial prints as `0`.
  std::string to_string() const;

private:
  std::map<TermKey, Rational> terms_;
};

SymPoly multiply(const SymPoly& p, const SymPoly& q);
SymPoly commutator(const SymPoly& p, const SymPoly& q);

/// Target order of normal_form. Full: multipliers, positions, then L's, each
/// sorted. MultipliersLeft: only multipliers are moved (to the left, sorted);
/// the relative order of X and L factors is kept.
enum class Ordering { Full, MultipliersLeft };

struct Strategy {
  enum class Kind { Leftmost, Random } kind = Kind::Leftmost;
  std::uint64_t seed = 0;

  static Strategy leftmost() { return {}; }
  static Strategy random(std::uint64_t seed) { return {Kind::Random, seed}; }
};

/// Exhaustive rewriting with
///   L_j M(f) -> M(f) L_j - ih M(d_j f)
///   L_j X_k  -> X_k L_j  - ih delta_jk
///   L_j L_k  -> L_k L_j  - ih M(B_kj)     (j > k, B_kj with k < j)
///   d_c B_ab -> d_a B_cb - d_b B_ca        (c < a < b, from dB = 0)
/// and commuting multipliers and positions.
SymPoly normal_form(const SymPoly& p, Ordering ordering = Ordering::Full,
                    Strategy strategy = Strategy::leftmost(),
                    int derivative_cap = kDefaultDerivativeCap);

bool is_normal(const Word& w, Ordering ordering = Ordering::Full);

struct TermClass {
  int kappa = 0;  // X count
  int lambda = 0; // L count
  int mu = 0;     // M count
  int h_power = 0;
  auto operator<=>(const TermClass&) const = default;
};

/// Generator counts of a normal-form term. Throws NotNormalForm.
TermClass classify(const TermKey& term);

/// Two gradings preserved by every rewrite rule:
///   dh = lambda + h_power + #multipliers
///   d1 = kappa - lambda - sum over multipliers of (|alpha| + 1 for A, |alpha| + 2 for B)
struct Grading {
  int dh = 0;
  int d1 = 0;
  auto operator<=>(const Grading&) const = default;
};
Grading grading(const TermKey& term);

} // namespace maglab::sym
