#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace maglab {

/// Monomial layout and product table for truncated Taylor series in d
/// variables up to total order `order`. Shared between jets of one shape.
class JetSpace {
public:
  static std::shared_ptr<const JetSpace> get(int dim, int order);

  int dim() const { return dim_; }
  int order() const { return order_; }
  std::size_t size() const { return monomials_.size(); }
  const std::vector<int>& monomial(std::size_t i) const { return monomials_[i]; }
  std::size_t index_of(std::span<const int> alpha) const;

  struct Product {
    std::uint32_t lhs, rhs, out;
  };
  const std::vector<Product>& products() const { return products_; }

  JetSpace(int dim, int order);

private:
  int dim_, order_;
  std::vector<std::vector<int>> monomials_;
  std::vector<Product> products_;
};

/// Truncated multivariate Taylor expansion f(x0 + dx) = sum c_alpha dx^alpha.
/// Arithmetic is exact up to the truncation order, so derivatives of
/// compositions come out in closed form.
class Jet {
public:
  Jet(const JetSpace* space, double constant = 0.0);

  static Jet variable(const JetSpace* space, int axis, double value);

  const JetSpace* space() const { return space_; }
  double value() const { return coeffs_[0]; }
  double coeff(std::size_t i) const { return coeffs_[i]; }
  /// d^alpha f(x0) = alpha! c_alpha.
  double derivative(std::span<const int> alpha) const;

  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(double s);
  Jet& operator+=(double s) {
    coeffs_[0] += s;
    return *this;
  }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(Jet a, double s) { return a *= s; }
  friend Jet operator*(double s, Jet a) { return a *= s; }
  friend Jet operator-(Jet a) { return a *= -1.0; }
  friend Jet operator*(const Jet& a, const Jet& b);

  friend Jet sin(const Jet& a);
  friend Jet cos(const Jet& a);

private:
  const JetSpace* space_;
  std::vector<double> coeffs_;
};

} // namespace maglab
