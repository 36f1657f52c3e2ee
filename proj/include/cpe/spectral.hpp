/// @file spectral.hpp
/// @brief Fourier x cosine/sine discretization of the slab T^2 x (0,h).
///
/// Horizontal directions are 2*pi periodic and sampled on uniform grids of
/// nx1 x nx2 points. The vertical direction uses the nz-point uniform grid
/// z_k = h k / (nz - 1) with both endpoints. Fields that satisfy homogeneous
/// Neumann data in z (density, horizontal velocity) are cosine series (even
/// parity); fields that vanish at both ends (vertical velocity, z-derivatives
/// of even fields) are sine series (odd parity). Grid storage is x1-fastest,
/// then x2, then z.
#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace cpe {

using cplx = std::complex<double>;

struct DomainSpec {
  int nx1 = 16;
  int nx2 = 16;
  int nz = 9;
  double h = 0.5;

  /// Throws InvalidSpec unless nx1, nx2 are even and >= 8, nz is odd and
  /// >= 5, and 0 < h < 1.
  void validate() const;

  std::size_t n2d() const { return static_cast<std::size_t>(nx1) * nx2; }
  std::size_t n3d() const { return n2d() * static_cast<std::size_t>(nz); }
  bool operator==(const DomainSpec&) const = default;
};

enum class Parity { Even, Odd };

Parity operator*(Parity a, Parity b);
Parity flip(Parity p);

enum class DiffOp {
  dx1,
  dx2,
  dz,
  laplace_x,
  laplace,
  bilaplace,
  laplace_x3,
  laplace_x5
};

/// Eigenbasis of -Laplace with periodic x and Neumann z data, together with
/// precomputed transforms and derivative multipliers. Immutable once built.
///
/// Spectral coefficients use the half-complex layout of a real 2D FFT: the
/// index of (k1, k2, m) is k1 + (nx1/2 + 1) * (k2_index + nx2 * m) with
/// k1 in [0, nx1/2] and k2_index in [0, nx2) wrapped to signed wavenumbers.
/// The field value is sum over the full k-plane of c e^{i k.x} times
/// cos(m pi z / h) (even) or sin(m pi z / h) (odd).
class Basis {
 public:
  explicit Basis(const DomainSpec& spec);
  ~Basis();
  Basis(const Basis&) = delete;
  Basis& operator=(const Basis&) = delete;

  const DomainSpec& spec() const { return spec_; }
  int nx1() const { return spec_.nx1; }
  int nx2() const { return spec_.nx2; }
  int nz() const { return spec_.nz; }
  double h() const { return spec_.h; }
  /// Highest vertical mode index, nz - 1.
  int top_mode() const { return spec_.nz - 1; }
  std::size_t n2d() const { return spec_.n2d(); }
  std::size_t n3d() const { return spec_.n3d(); }
  int nk1() const { return spec_.nx1 / 2 + 1; }
  std::size_t nc2d() const { return static_cast<std::size_t>(nk1()) * spec_.nx2; }
  std::size_t nc3d() const { return nc2d() * static_cast<std::size_t>(spec_.nz); }

  double x1(int i) const;
  double x2(int j) const;
  double z(int k) const;
  double dz() const { return spec_.h / top_mode(); }

  /// Signed wavenumber of a k2 storage index.
  int wavenumber2(int index) const;
  /// Vertical wavenumber m pi / h.
  double z_wavenumber(int m) const;
  /// Exact eigenvalue of -Laplace for the mode (k1, k2, m).
  double eigenvalue(int k1, int k2, int m) const;

  /// i k1 and i k2 per 2D spectral index; zero on Nyquist rows.
  const std::vector<cplx>& ik1() const { return ik1_; }
  const std::vector<cplx>& ik2() const { return ik2_; }
  /// Horizontal Laplacian multiplier, equal to the square of the first
  /// derivative multipliers (so Nyquist modes carry zero).
  const std::vector<double>& laplace_x_multiplier() const { return lap_x_; }
  /// Second z-derivative multiplier per vertical mode (zero at m = nz - 1).
  const std::vector<double>& zz_multiplier() const { return zz_; }
  /// 2/3-rule masks.
  const std::vector<char>& keep2d() const { return keep2d_; }
  const std::vector<char>& keep_m() const { return keep_m_; }
  /// Trapezoid weights on the z grid.
  const std::vector<double>& z_weights() const { return zw_; }

  /// Raw transforms on contiguous buffers of size n2d/nc2d or n3d/nc3d.
  void forward2d(std::span<const double> in, std::span<cplx> out) const;
  void inverse2d(std::span<const cplx> in, std::span<double> out) const;
  void forward3d(std::span<const double> in, Parity p, std::span<cplx> out) const;
  void inverse3d(std::span<const cplx> in, Parity p, std::span<double> out) const;

 private:
  DomainSpec spec_;
  std::vector<cplx> ik1_, ik2_;
  std::vector<double> lap_x_, zz_, zw_;
  std::vector<char> keep2d_, keep_m_;
  struct Plans;
  std::unique_ptr<Plans> plans_;
};

using BasisPtr = std::shared_ptr<const Basis>;

/// Validates the DomainSpec and builds the shared basis.
BasisPtr make_basis(const DomainSpec& spec);

void require_same_grid(const Basis& a, const Basis& b);

struct Field2D {
  BasisPtr basis;
  std::vector<double> values;

  Field2D() = default;
  explicit Field2D(BasisPtr b);
  Field2D(BasisPtr b, std::vector<double> v);

  static Field2D constant(BasisPtr b, double value);
  static Field2D from_function(BasisPtr b,
                               const std::function<double(double, double)>& f);

  double& operator()(int i, int j) { return values[index(i, j)]; }
  double operator()(int i, int j) const { return values[index(i, j)]; }
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) + static_cast<std::size_t>(basis->nx1()) * j;
  }
  double min() const;
  double max() const;
  double max_abs() const;

  Field2D& operator+=(const Field2D& o);
  Field2D& operator-=(const Field2D& o);
  Field2D& operator*=(double s);
};

struct Field3D {
  BasisPtr basis;
  Parity parity = Parity::Even;
  std::vector<double> values;

  Field3D() = default;
  Field3D(BasisPtr b, Parity p);
  Field3D(BasisPtr b, Parity p, std::vector<double> v);

  static Field3D constant(BasisPtr b, double value);
  static Field3D from_function(
      BasisPtr b, Parity p,
      const std::function<double(double, double, double)>& f);

  double& operator()(int i, int j, int k) { return values[index(i, j, k)]; }
  double operator()(int i, int j, int k) const { return values[index(i, j, k)]; }
  std::size_t index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(basis->nx1()) *
               (static_cast<std::size_t>(j) +
                static_cast<std::size_t>(basis->nx2()) * k);
  }
  double max_abs() const;

  Field3D& operator+=(const Field3D& o);
  Field3D& operator-=(const Field3D& o);
  Field3D& operator*=(double s);
};

Field2D operator+(Field2D a, const Field2D& b);
Field2D operator-(Field2D a, const Field2D& b);
Field2D operator*(const Field2D& a, const Field2D& b);
Field2D operator*(double s, Field2D a);
Field3D operator+(Field3D a, const Field3D& b);
Field3D operator-(Field3D a, const Field3D& b);
/// Pointwise product; parity follows the product rule for cos/sin series.
Field3D operator*(const Field3D& a, const Field3D& b);
Field3D operator*(double s, Field3D a);
/// Pointwise product with a z-independent field.
Field3D operator*(const Field2D& a, const Field3D& b);

/// Applies a pointwise map.
Field2D map(const Field2D& f, const std::function<double(double)>& g);

/// A z-independent field viewed as an even 3D field.
Field3D broadcast(const Field2D& f);

struct Spectrum2D {
  BasisPtr basis;
  std::vector<cplx> c;
  cplx& at(int k1, int k2index) {
    return c[static_cast<std::size_t>(k1) + static_cast<std::size_t>(basis->nk1()) * k2index];
  }
  cplx at(int k1, int k2index) const {
    return c[static_cast<std::size_t>(k1) + static_cast<std::size_t>(basis->nk1()) * k2index];
  }
};

struct Spectrum3D {
  BasisPtr basis;
  Parity parity = Parity::Even;
  std::vector<cplx> c;
  cplx& at(int k1, int k2index, int m) {
    return c[static_cast<std::size_t>(k1) +
             static_cast<std::size_t>(basis->nk1()) *
                 (static_cast<std::size_t>(k2index) +
                  static_cast<std::size_t>(basis->nx2()) * m)];
  }
  cplx at(int k1, int k2index, int m) const {
    return c[static_cast<std::size_t>(k1) +
             static_cast<std::size_t>(basis->nk1()) *
                 (static_cast<std::size_t>(k2index) +
                  static_cast<std::size_t>(basis->nx2()) * m)];
  }
};

Spectrum2D to_spectral(const Field2D& f);
Field2D from_spectral(const Spectrum2D& s);
Spectrum3D to_spectral(const Field3D& f);
Field3D from_spectral(const Spectrum3D& s);

/// Spectral derivative. dz on a 2D field throws UnsupportedAxis.
Field2D diff(const Field2D& f, DiffOp op);
Field3D diff(const Field3D& f, DiffOp op);

/// Zeroes |k1| > nx1/3, |k2| > nx2/3 and m > 2(nz-1)/3.
Spectrum2D dealias(Spectrum2D s);
Spectrum3D dealias(Spectrum3D s);
/// Grid-space shorthand for from_spectral(dealias(to_spectral(f))).
Field2D project(const Field2D& f);
Field3D project(const Field3D& f);

/// Integral over the torus T^2 (rectangle rule).
double integrate(const Field2D& f);
/// Integral over the slab (rectangle rule in x, trapezoid in z).
double integrate(const Field3D& f);
/// Coefficient-space inner product matching integrate(f * g).
double spectral_inner(const Spectrum2D& a, const Spectrum2D& b);
double spectral_inner(const Spectrum3D& a, const Spectrum3D& b);

/// Values on the x grid of the series evaluated at an arbitrary height z.
Field2D evaluate_at_height(const Spectrum3D& s, double z);

/// Copies shared modes into a spectrum on another grid (truncating or
/// zero-padding). Nyquist rows of the smaller grid are left empty.
Spectrum2D resample(const Spectrum2D& s, const BasisPtr& target);
Spectrum3D resample(const Spectrum3D& s, const BasisPtr& target);

struct VField2D {
  Field2D c1, c2;
};

struct VField3D {
  Field3D c1, c2;
  VField3D& operator+=(const VField3D& o) {
    c1 += o.c1;
    c2 += o.c2;
    return *this;
  }
  VField3D& operator*=(double s) {
    c1 *= s;
    c2 *= s;
    return *this;
  }
};

VField3D operator+(VField3D a, const VField3D& b);
VField3D operator-(VField3D a, const VField3D& b);
VField3D operator*(double s, VField3D a);
VField3D zero_vfield(const BasisPtr& b);
VField3D project(const VField3D& f);
/// Integral of a . b over the slab.
double integrate_dot(const VField3D& a, const VField3D& b);
double l2_norm(const VField3D& f);
double l2_norm(const Field2D& f);

VField2D grad_x(const Field2D& f);
VField3D grad_x_broadcast(const Field2D& f);
Field2D div_x(const VField2D& f);
Field3D div_x(const VField3D& f);

}  // namespace cpe
