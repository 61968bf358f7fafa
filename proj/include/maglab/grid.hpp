#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace maglab {

using cplx = std::complex<double>;

/// Uniform periodic grid on the box [-L, L)^d with N points per axis,
/// stored row-major (axis 0 varies slowest).
struct GridSpec {
  int dim = 1;
  double half_width = 1.0;
  int points = 8;

  /// Validating constructor: 1 <= d <= 4, N >= 8 a power of two,
  /// L > 0 and N^d <= 2^28. Throws InvalidGrid.
  static GridSpec make(int d, double half_width, int points);

  void validate() const;

  double spacing() const { return 2.0 * half_width / points; }
  double cell_volume() const;
  std::size_t size() const;
  std::size_t stride(int axis) const;
  double coordinate(int i) const { return -half_width + i * spacing(); }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Real-valued grid field (multipliers such as A_j or B_jk sampled on nodes).
using RealField = std::vector<double>;

class Wavefunction {
public:
  /// Empty state on a zero-dimensional grid; placeholder before assignment.
  Wavefunction() = default;
  explicit Wavefunction(const GridSpec& spec);
  Wavefunction(const GridSpec& spec, std::vector<cplx> values);

  const GridSpec& spec() const { return spec_; }
  std::size_t size() const { return values_.size(); }

  std::span<cplx> values() { return values_; }
  std::span<const cplx> values() const { return values_; }
  cplx& operator[](std::size_t i) { return values_[i]; }
  const cplx& operator[](std::size_t i) const { return values_[i]; }

  Wavefunction& operator+=(const Wavefunction& other);
  Wavefunction& operator-=(const Wavefunction& other);
  Wavefunction& operator*=(cplx scale);

  /// this += a * x
  void axpy(cplx a, const Wavefunction& x);

  bool all_finite() const;

private:
  GridSpec spec_;
  std::vector<cplx> values_;
};

Wavefunction operator+(Wavefunction a, const Wavefunction& b);
Wavefunction operator-(Wavefunction a, const Wavefunction& b);
Wavefunction operator*(cplx s, Wavefunction a);

void require_same_grid(const Wavefunction& a, const Wavefunction& b);

/// Samples of x_axis on every node.
RealField coordinate_field(const GridSpec& spec, int axis);

/// Pointwise product f * psi.
Wavefunction multiply(const RealField& f, const Wavefunction& psi);

/// Calls fn(flat_index, x) for every node, x holding the d coordinates.
template <class Fn>
void for_each_node(const GridSpec& spec, Fn&& fn) {
  std::vector<int> idx(spec.dim, 0);
  std::vector<double> x(spec.dim, -spec.half_width);
  const std::size_t n = spec.size();
  for (std::size_t flat = 0; flat < n; ++flat) {
    fn(flat, std::span<const double>(x));
    for (int a = spec.dim - 1; a >= 0; --a) {
      if (++idx[a] < spec.points) {
        x[a] = spec.coordinate(idx[a]);
        break;
      }
      idx[a] = 0;
      x[a] = -spec.half_width;
    }
  }
}

/// (pi s^2)^{-d/4} exp(i xi.(x-x0)/h) exp(-|x-x0|^2/(2 s^2)) sampled on the grid.
/// Throws PacketUnresolved if s < 4*dx and PacketNearBoundary if the center is
/// closer than 4s to a face of the box.
Wavefunction gaussian_packet(const GridSpec& spec, std::span<const double> center,
                             std::span<const double> momentum, double width, double h);

/// m-th partial derivative along `axis` (0-based) by FFT, with symmetric
/// integer frequencies. The Nyquist mode is dropped for odd m.
Wavefunction spectral_derivative(const Wavefunction& psi, int axis, int order);

/// Mixed partial derivative d^beta psi.
Wavefunction spectral_partial(const Wavefunction& psi, std::span<const int> beta);

/// Delta^d * sum conj(psi) phi.
cplx inner(const Wavefunction& psi, const Wavefunction& phi);
double l2_norm(const Wavefunction& psi);

/// L2 norm computed from the discrete Fourier coefficients (Parseval check).
double spectral_l2_norm(const Wavefunction& psi);

/// Discrete Schwartz semi-norm: max over |alpha|+|beta| <= k of the grid
/// sup of |x^alpha d^beta psi|. Requires k <= 6 and boundary_mass(psi, 0.1) <= 1e-8.
double seminorm_pk(const Wavefunction& psi, int k);

/// ||exp(beta <x>) psi|| with <x> = sqrt(1 + |x|^2).
double weighted_l2(const Wavefunction& psi, double beta);

/// Fraction of the squared norm carried by the shell ||x||_inf >= (1-m) L.
/// Nodes own the cells [x_i, x_i + dx); cells straddling the shell edge are
/// weighted by the fraction of their volume inside the shell.
double boundary_mass(const Wavefunction& psi, double margin_fraction);

inline constexpr double kBoundaryMassLimit = 1e-8;

} // namespace maglab
