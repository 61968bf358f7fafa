#pragma once

#include "maglab/jet.hpp"

#include <map>
#include <span>
#include <vector>

namespace maglab {

/// Multivariate real polynomial in d variables, sparse in monomials.
class Polynomial {
public:
  using Exponents = std::vector<int>;

  explicit Polynomial(int dim = 1) : dim_(dim) {}

  static Polynomial constant(int dim, double c);
  static Polynomial variable(int dim, int axis);
  static Polynomial monomial(int dim, Exponents e, double c = 1.0);

  int dim() const { return dim_; }
  const std::map<Exponents, double>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  int degree() const;

  double evaluate(std::span<const double> x) const;
  Jet evaluate(std::span<const Jet> x) const;
  Polynomial derivative(int axis) const;

  Polynomial& operator+=(const Polynomial& o);
  Polynomial& operator-=(const Polynomial& o);
  Polynomial& operator*=(double s);

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
  friend Polynomial operator*(double s, Polynomial a) { return a *= s; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);

  /// Largest coefficient magnitude (0 for the zero polynomial).
  double max_abs_coeff() const;

private:
  void add_term(const Exponents& e, double c);

  int dim_;
  std::map<Exponents, double> terms_;
};

/// d x d matrix of polynomials, row-major.
struct PolyMatrix {
  int dim = 0;
  std::vector<Polynomial> entries;

  explicit PolyMatrix(int d = 0);
  Polynomial& at(int j, int k) { return entries[j * dim + k]; }
  const Polynomial& at(int j, int k) const { return entries[j * dim + k]; }
};

} // namespace maglab
