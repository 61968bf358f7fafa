#include "maglab/polynomial.hpp"

#include "maglab/error.hpp"

#include <algorithm>
#include <cmath>

namespace maglab {

Polynomial Polynomial::constant(int dim, double c) {
  Polynomial p(dim);
  p.add_term(Exponents(dim, 0), c);
  return p;
}

Polynomial Polynomial::variable(int dim, int axis) {
  Exponents e(dim, 0);
  e[axis] = 1;
  return monomial(dim, std::move(e));
}

Polynomial Polynomial::monomial(int dim, Exponents e, double c) {
  require(static_cast<int>(e.size()) == dim, Errc::PreconditionViolation,
          "exponent vector has wrong length");
  Polynomial p(dim);
  p.add_term(e, c);
  return p;
}

void Polynomial::add_term(const Exponents& e, double c) {
  if (c == 0.0) return;
  auto [it, inserted] = terms_.emplace(e, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0.0) terms_.erase(it);
  }
}

int Polynomial::degree() const {
  int deg = 0;
  for (const auto& [e, c] : terms_) {
    int s = 0;
    for (int v : e) s += v;
    deg = std::max(deg, s);
  }
  return deg;
}

double Polynomial::evaluate(std::span<const double> x) const {
  double sum = 0;
  for (const auto& [e, c] : terms_) {
    double m = c;
    for (int a = 0; a < dim_; ++a)
      for (int k = 0; k < e[a]; ++k) m *= x[a];
    sum += m;
  }
  return sum;
}

Jet Polynomial::evaluate(std::span<const Jet> x) const {
  Jet sum(x[0].space());
  for (const auto& [e, c] : terms_) {
    Jet m(x[0].space(), c);
    for (int a = 0; a < dim_; ++a)
      for (int k = 0; k < e[a]; ++k) m = m * x[a];
    sum += m;
  }
  return sum;
}

Polynomial Polynomial::derivative(int axis) const {
  Polynomial out(dim_);
  for (const auto& [e, c] : terms_) {
    if (e[axis] == 0) continue;
    Exponents f = e;
    f[axis] -= 1;
    out.add_term(f, c * e[axis]);
  }
  return out;
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
  require(o.dim_ == dim_, Errc::PreconditionViolation, "polynomial dimension mismatch");
  for (const auto& [e, c] : o.terms_) add_term(e, c);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& o) {
  require(o.dim_ == dim_, Errc::PreconditionViolation, "polynomial dimension mismatch");
  for (const auto& [e, c] : o.terms_) add_term(e, -c);
  return *this;
}

Polynomial& Polynomial::operator*=(double s) {
  if (s == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto& [e, c] : terms_) c *= s;
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  require(a.dim_ == b.dim_, Errc::PreconditionViolation, "polynomial dimension mismatch");
  Polynomial out(a.dim_);
  for (const auto& [ea, ca] : a.terms_)
    for (const auto& [eb, cb] : b.terms_) {
      Polynomial::Exponents e(a.dim_);
      for (int k = 0; k < a.dim_; ++k) e[k] = ea[k] + eb[k];
      out.add_term(e, ca * cb);
    }
  return out;
}

double Polynomial::max_abs_coeff() const {
  double m = 0;
  for (const auto& [e, c] : terms_) m = std::max(m, std::abs(c));
  return m;
}

PolyMatrix::PolyMatrix(int d) : dim(d), entries(static_cast<std::size_t>(d) * d, Polynomial(d)) {}

} // namespace maglab
