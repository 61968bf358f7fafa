#include "maglab/jet.hpp"

#include "maglab/error.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numeric>

namespace maglab {

namespace {

void enumerate(int dim, int order, std::vector<std::vector<int>>& out) {
  // Graded order: total degree first, then lexicographic (descending on axis 0).
  for (int deg = 0; deg <= order; ++deg) {
    std::vector<int> cur(dim, 0);
    auto rec = [&](auto&& self, int axis, int remaining) -> void {
      if (axis == dim - 1) {
        cur[axis] = remaining;
        out.push_back(cur);
        return;
      }
      for (int e = remaining; e >= 0; --e) {
        cur[axis] = e;
        self(self, axis + 1, remaining - e);
      }
    };
    rec(rec, 0, deg);
  }
}

double factorial_product(std::span<const int> alpha) {
  double f = 1.0;
  for (int a : alpha)
    for (int i = 2; i <= a; ++i) f *= i;
  return f;
}

} // namespace

JetSpace::JetSpace(int dim, int order) : dim_(dim), order_(order) {
  enumerate(dim, order, monomials_);
  for (std::size_t i = 0; i < monomials_.size(); ++i) {
    const int di = std::accumulate(monomials_[i].begin(), monomials_[i].end(), 0);
    for (std::size_t j = 0; j < monomials_.size(); ++j) {
      const int dj = std::accumulate(monomials_[j].begin(), monomials_[j].end(), 0);
      if (di + dj > order) continue;
      std::vector<int> sum(dim);
      for (int a = 0; a < dim; ++a) sum[a] = monomials_[i][a] + monomials_[j][a];
      products_.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j),
                           static_cast<std::uint32_t>(index_of(sum))});
    }
  }
}

std::shared_ptr<const JetSpace> JetSpace::get(int dim, int order) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const JetSpace>> cache;
  require(dim >= 1 && order >= 0, Errc::PreconditionViolation, "invalid jet shape");
  std::lock_guard lock(mutex);
  auto& slot = cache[{dim, order}];
  if (!slot) slot = std::make_shared<JetSpace>(dim, order);
  return slot;
}

std::size_t JetSpace::index_of(std::span<const int> alpha) const {
  // Rank inside the graded enumeration: count monomials of lower degree, then
  // those of equal degree preceding alpha.
  int deg = 0;
  for (int a : alpha) deg += a;
  auto binom = [](int n, int k) {
    if (k < 0 || n < k) return std::size_t{0};
    double r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return static_cast<std::size_t>(std::llround(r));
  };
  std::size_t rank = binom(deg - 1 + dim_, dim_); // monomials of degree < deg
  int remaining = deg;
  for (int axis = 0; axis + 1 < dim_; ++axis) {
    // Exponents larger than alpha[axis] on this axis come first.
    for (int e = remaining; e > alpha[axis]; --e) {
      const int rest = remaining - e;
      const int vars = dim_ - axis - 1;
      rank += binom(rest + vars - 1, vars - 1);
    }
    remaining -= alpha[axis];
  }
  return rank;
}

Jet::Jet(const JetSpace* space, double constant) : space_(space), coeffs_(space->size(), 0.0) {
  coeffs_[0] = constant;
}

Jet Jet::variable(const JetSpace* space, int axis, double value) {
  Jet j(space, value);
  if (space->order() >= 1) {
    std::vector<int> e(space->dim(), 0);
    e[axis] = 1;
    j.coeffs_[space->index_of(e)] = 1.0;
  }
  return j;
}

double Jet::derivative(std::span<const int> alpha) const {
  int deg = 0;
  for (int a : alpha) deg += a;
  if (deg > space_->order())
    fail(Errc::DerivativeOrderExceeded, "jet truncated below requested derivative order");
  return factorial_product(alpha) * coeffs_[space_->index_of(alpha)];
}

Jet& Jet::operator+=(const Jet& o) {
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
  return *this;
}

Jet& Jet::operator*=(double s) {
  for (auto& c : coeffs_) c *= s;
  return *this;
}

Jet operator*(const Jet& a, const Jet& b) {
  Jet out(a.space_);
  for (const auto& p : a.space_->products())
    out.coeffs_[p.out] += a.coeffs_[p.lhs] * b.coeffs_[p.rhs];
  return out;
}

namespace {

// sin and cos of a jet with zero constant term (nilpotent to order+1).
std::pair<Jet, Jet> sin_cos_nilpotent(const Jet& v) {
  const int order = v.space()->order();
  Jet s(v.space()), c(v.space(), 1.0);
  Jet power(v.space(), 1.0);
  double fact = 1.0;
  for (int k = 1; k <= order; ++k) {
    power = power * v;
    fact *= k;
    const double sign = ((k / 2) % 2 == 0) ? 1.0 : -1.0;
    if (k % 2 == 1)
      s += power * (sign / fact);
    else
      c += power * (sign / fact);
  }
  return {s, c};
}

} // namespace

Jet sin(const Jet& a) {
  Jet v = a;
  v += -a.value();
  auto [s, c] = sin_cos_nilpotent(v);
  return s * std::cos(a.value()) + c * std::sin(a.value());
}

Jet cos(const Jet& a) {
  Jet v = a;
  v += -a.value();
  auto [s, c] = sin_cos_nilpotent(v);
  return c * std::cos(a.value()) - s * std::sin(a.value());
}

} // namespace maglab
