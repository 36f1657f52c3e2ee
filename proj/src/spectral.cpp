#include "cpe/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

#include "cpe/errors.hpp"

namespace cpe {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// FFTW planning is not reentrant; execution with the new-array API is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

void DomainSpec::validate() const {
  if (nx1 < 8 || nx2 < 8 || nx1 % 2 != 0 || nx2 % 2 != 0) {
    throw InvalidSpec("nx1 and nx2 must be even and >= 8 (got " +
                      std::to_string(nx1) + ", " + std::to_string(nx2) + ")");
  }
  if (nz < 5 || nz % 2 == 0) {
    throw InvalidSpec("nz must be odd and >= 5 (got " + std::to_string(nz) + ")");
  }
  if (!(h > 0.0 && h < 1.0)) {
    throw InvalidSpec("h must lie in (0, 1) (got " + std::to_string(h) + ")");
  }
}

Parity operator*(Parity a, Parity b) {
  return a == b ? Parity::Even : Parity::Odd;
}

Parity flip(Parity p) { return p == Parity::Even ? Parity::Odd : Parity::Even; }

struct Basis::Plans {
  fftw_plan r2c2d = nullptr;
  fftw_plan c2r2d = nullptr;
  fftw_plan r2c3d = nullptr;
  fftw_plan c2r3d = nullptr;
  fftw_plan dct = nullptr;
  fftw_plan dst = nullptr;

  ~Plans() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    for (fftw_plan p : {r2c2d, c2r2d, r2c3d, c2r3d, dct, dst}) {
      if (p) fftw_destroy_plan(p);
    }
  }
};

Basis::Basis(const DomainSpec& spec) : spec_(spec), plans_(std::make_unique<Plans>()) {
  spec_.validate();
  const int n1 = spec_.nx1, n2 = spec_.nx2, nz = spec_.nz, top = nz - 1;
  const std::size_t nc = nc2d();

  ik1_.resize(nc);
  ik2_.resize(nc);
  lap_x_.resize(nc);
  keep2d_.resize(nc);
  for (int j = 0; j < n2; ++j) {
    const int k2 = wavenumber2(j);
    const double kd2 = (j == n2 / 2) ? 0.0 : k2;
    for (int k1 = 0; k1 < nk1(); ++k1) {
      const double kd1 = (k1 == n1 / 2) ? 0.0 : k1;
      const std::size_t idx = static_cast<std::size_t>(k1) + static_cast<std::size_t>(nk1()) * j;
      ik1_[idx] = cplx(0.0, kd1);
      ik2_[idx] = cplx(0.0, kd2);
      lap_x_[idx] = -(kd1 * kd1 + kd2 * kd2);
      keep2d_[idx] = (3 * k1 <= n1 && 3 * std::abs(k2) <= n2) ? 1 : 0;
    }
  }
  zz_.resize(nz);
  keep_m_.resize(nz);
  zw_.assign(nz, dz());
  zw_.front() *= 0.5;
  zw_.back() *= 0.5;
  for (int m = 0; m < nz; ++m) {
    const double km = z_wavenumber(m);
    zz_[m] = (m == top) ? 0.0 : -km * km;
    keep_m_[m] = (3 * m <= 2 * top) ? 1 : 0;
  }

  std::vector<double> rbuf(n3d());
  std::vector<cplx> cbuf(nc3d());
  const int dims[2] = {n2, n1};
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  const int n2d_i = static_cast<int>(n2d());
  const int nc_i = static_cast<int>(nc);
  std::lock_guard<std::mutex> lock(planner_mutex());
  plans_->r2c2d = fftw_plan_many_dft_r2c(2, dims, 1, rbuf.data(), nullptr, 1, n2d_i,
                                         as_fftw(cbuf.data()), nullptr, 1, nc_i, flags);
  plans_->c2r2d = fftw_plan_many_dft_c2r(2, dims, 1, as_fftw(cbuf.data()), nullptr, 1, nc_i,
                                         rbuf.data(), nullptr, 1, n2d_i, flags);
  plans_->r2c3d = fftw_plan_many_dft_r2c(2, dims, nz, rbuf.data(), nullptr, 1, n2d_i,
                                         as_fftw(cbuf.data()), nullptr, 1, nc_i, flags);
  plans_->c2r3d = fftw_plan_many_dft_c2r(2, dims, nz, as_fftw(cbuf.data()), nullptr, 1, nc_i,
                                         rbuf.data(), nullptr, 1, n2d_i, flags);
  const int nzc = nz;
  const int nzs = nz - 2;
  const fftw_r2r_kind redft = FFTW_REDFT00;
  const fftw_r2r_kind rodft = FFTW_RODFT00;
  plans_->dct = fftw_plan_many_r2r(1, &nzc, n2d_i, rbuf.data(), nullptr, n2d_i, 1,
                                   rbuf.data(), nullptr, n2d_i, 1, &redft, flags);
  plans_->dst = fftw_plan_many_r2r(1, &nzs, n2d_i, rbuf.data() + n2d(), nullptr, n2d_i, 1,
                                   rbuf.data() + n2d(), nullptr, n2d_i, 1, &rodft, flags);
  if (!plans_->r2c2d || !plans_->c2r2d || !plans_->r2c3d || !plans_->c2r3d ||
      !plans_->dct || !plans_->dst) {
    throw InvalidSpec("FFTW planning failed");
  }
}

Basis::~Basis() = default;

double Basis::x1(int i) const { return kTwoPi * i / spec_.nx1; }
double Basis::x2(int j) const { return kTwoPi * j / spec_.nx2; }
double Basis::z(int k) const { return spec_.h * k / top_mode(); }

int Basis::wavenumber2(int index) const {
  return index <= spec_.nx2 / 2 ? index : index - spec_.nx2;
}

double Basis::z_wavenumber(int m) const { return m * std::numbers::pi / spec_.h; }

double Basis::eigenvalue(int k1, int k2, int m) const {
  const double km = z_wavenumber(m);
  return static_cast<double>(k1) * k1 + static_cast<double>(k2) * k2 + km * km;
}

void Basis::forward2d(std::span<const double> in, std::span<cplx> out) const {
  if (in.size() != n2d() || out.size() != nc2d()) throw ShapeMismatch("forward2d size");
  std::vector<double> buf(in.begin(), in.end());
  fftw_execute_dft_r2c(plans_->r2c2d, buf.data(), as_fftw(out.data()));
  const double scale = 1.0 / static_cast<double>(n2d());
  for (auto& v : out) v *= scale;
}

void Basis::inverse2d(std::span<const cplx> in, std::span<double> out) const {
  if (in.size() != nc2d() || out.size() != n2d()) throw ShapeMismatch("inverse2d size");
  std::vector<cplx> buf(in.begin(), in.end());
  fftw_execute_dft_c2r(plans_->c2r2d, as_fftw(buf.data()), out.data());
}

void Basis::forward3d(std::span<const double> in, Parity p, std::span<cplx> out) const {
  if (in.size() != n3d() || out.size() != nc3d()) throw ShapeMismatch("forward3d size");
  const int top = top_mode();
  const std::size_t plane = n2d();
  std::vector<double> buf(in.begin(), in.end());
  const double norm = 1.0 / static_cast<double>(plane);
  if (p == Parity::Even) {
    fftw_execute_r2r(plans_->dct, buf.data(), buf.data());
    for (int m = 0; m <= top; ++m) {
      const double s = norm / ((m == 0 || m == top) ? 2.0 * top : static_cast<double>(top));
      for (std::size_t q = 0; q < plane; ++q) buf[m * plane + q] *= s;
    }
  } else {
    fftw_execute_r2r(plans_->dst, buf.data() + plane, buf.data() + plane);
    const double s = norm / top;
    for (int m = 1; m < top; ++m) {
      for (std::size_t q = 0; q < plane; ++q) buf[m * plane + q] *= s;
    }
    std::fill_n(buf.begin(), plane, 0.0);
    std::fill_n(buf.begin() + static_cast<std::ptrdiff_t>(top * plane), plane, 0.0);
  }
  fftw_execute_dft_r2c(plans_->r2c3d, buf.data(), as_fftw(out.data()));
}

void Basis::inverse3d(std::span<const cplx> in, Parity p, std::span<double> out) const {
  if (in.size() != nc3d() || out.size() != n3d()) throw ShapeMismatch("inverse3d size");
  const int top = top_mode();
  const std::size_t plane = n2d();
  std::vector<cplx> buf(in.begin(), in.end());
  fftw_execute_dft_c2r(plans_->c2r3d, as_fftw(buf.data()), out.data());
  for (int m = 1; m < top; ++m) {
    for (std::size_t q = 0; q < plane; ++q) out[m * plane + q] *= 0.5;
  }
  if (p == Parity::Even) {
    fftw_execute_r2r(plans_->dct, out.data(), out.data());
  } else {
    fftw_execute_r2r(plans_->dst, out.data() + plane, out.data() + plane);
    std::fill_n(out.begin(), plane, 0.0);
    std::fill_n(out.begin() + static_cast<std::ptrdiff_t>(top * plane), plane, 0.0);
  }
}

BasisPtr make_basis(const DomainSpec& spec) {
  spec.validate();
  return std::make_shared<const Basis>(spec);
}

void require_same_grid(const Basis& a, const Basis& b) {
  if (&a != &b && !(a.spec() == b.spec())) throw ShapeMismatch("fields live on different grids");
}

// ---------------------------------------------------------------------------
// Fields

Field2D::Field2D(BasisPtr b) : basis(std::move(b)), values(basis->n2d(), 0.0) {}

Field2D::Field2D(BasisPtr b, std::vector<double> v) : basis(std::move(b)), values(std::move(v)) {
  if (values.size() != basis->n2d()) throw ShapeMismatch("Field2D value count");
}

Field2D Field2D::constant(BasisPtr b, double value) {
  Field2D f(std::move(b));
  std::fill(f.values.begin(), f.values.end(), value);
  return f;
}

Field2D Field2D::from_function(BasisPtr b, const std::function<double(double, double)>& f) {
  Field2D out(std::move(b));
  const Basis& B = *out.basis;
  for (int j = 0; j < B.nx2(); ++j)
    for (int i = 0; i < B.nx1(); ++i) out(i, j) = f(B.x1(i), B.x2(j));
  return out;
}

double Field2D::min() const { return *std::min_element(values.begin(), values.end()); }
double Field2D::max() const { return *std::max_element(values.begin(), values.end()); }
double Field2D::max_abs() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

Field2D& Field2D::operator+=(const Field2D& o) {
  require_same_grid(*basis, *o.basis);
  for (std::size_t q = 0; q < values.size(); ++q) values[q] += o.values[q];
  return *this;
}

Field2D& Field2D::operator-=(const Field2D& o) {
  require_same_grid(*basis, *o.basis);
  for (std::size_t q = 0; q < values.size(); ++q) values[q] -= o.values[q];
  return *this;
}

Field2D& Field2D::operator*=(double s) {
  for (double& v : values) v *= s;
  return *this;
}

Field3D::Field3D(BasisPtr b, Parity p) : basis(std::move(b)), parity(p), values(basis->n3d(), 0.0) {}

Field3D::Field3D(BasisPtr b, Parity p, std::vector<double> v)
    : basis(std::move(b)), parity(p), values(std::move(v)) {
  if (values.size() != basis->n3d()) throw ShapeMismatch("Field3D value count");
}

Field3D Field3D::constant(BasisPtr b, double value) {
  Field3D f(std::move(b), Parity::Even);
  std::fill(f.values.begin(), f.values.end(), value);
  return f;
}

Field3D Field3D::from_function(BasisPtr b, Parity p,
                               const std::function<double(double, double, double)>& f) {
  Field3D out(std::move(b), p);
  const Basis& B = *out.basis;
  for (int k = 0; k < B.nz(); ++k)
    for (int j = 0; j < B.nx2(); ++j)
      for (int i = 0; i < B.nx1(); ++i) out(i, j, k) = f(B.x1(i), B.x2(j), B.z(k));
  if (p == Parity::Odd) {
    // Sine series vanish at both ends.
    for (int j = 0; j < B.nx2(); ++j)
      for (int i = 0; i < B.nx1(); ++i) out(i, j, 0) = out(i, j, B.nz() - 1) = 0.0;
  }
  return out;
}

double Field3D::max_abs() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

Field3D& Field3D::operator+=(const Field3D& o) {
  require_same_grid(*basis, *o.basis);
  if (parity != o.parity) throw ShapeMismatch("adding fields of different z parity");
  for (std::size_t q = 0; q < values.size(); ++q) values[q] += o.values[q];
  return *this;
}

Field3D& Field3D::operator-=(const Field3D& o) {
  require_same_grid(*basis, *o.basis);
  if (parity != o.parity) throw ShapeMismatch("subtracting fields of different z parity");
  for (std::size_t q = 0; q < values.size(); ++q) values[q] -= o.values[q];
  return *this;
}

Field3D& Field3D::operator*=(double s) {
  for (double& v : values) v *= s;
  return *this;
}

Field2D operator+(Field2D a, const Field2D& b) { return a += b; }
Field2D operator-(Field2D a, const Field2D& b) { return a -= b; }
Field2D operator*(double s, Field2D a) { return a *= s; }

Field2D operator*(const Field2D& a, const Field2D& b) {
  require_same_grid(*a.basis, *b.basis);
  Field2D out(a.basis);
  for (std::size_t q = 0; q < out.values.size(); ++q) out.values[q] = a.values[q] * b.values[q];
  return out;
}

Field3D operator+(Field3D a, const Field3D& b) { return a += b; }
Field3D operator-(Field3D a, const Field3D& b) { return a -= b; }
Field3D operator*(double s, Field3D a) { return a *= s; }

Field3D operator*(const Field3D& a, const Field3D& b) {
  require_same_grid(*a.basis, *b.basis);
  Field3D out(a.basis, a.parity * b.parity);
  for (std::size_t q = 0; q < out.values.size(); ++q) out.values[q] = a.values[q] * b.values[q];
  return out;
}

Field3D operator*(const Field2D& a, const Field3D& b) {
  require_same_grid(*a.basis, *b.basis);
  Field3D out(b.basis, b.parity);
  const std::size_t plane = a.values.size();
  for (std::size_t q = 0; q < out.values.size(); ++q)
    out.values[q] = a.values[q % plane] * b.values[q];
  return out;
}

Field2D map(const Field2D& f, const std::function<double(double)>& g) {
  Field2D out(f.basis);
  for (std::size_t q = 0; q < out.values.size(); ++q) out.values[q] = g(f.values[q]);
  return out;
}

Field3D broadcast(const Field2D& f) {
  Field3D out(f.basis, Parity::Even);
  const std::size_t plane = f.values.size();
  for (std::size_t q = 0; q < out.values.size(); ++q) out.values[q] = f.values[q % plane];
  return out;
}

// ---------------------------------------------------------------------------
// Transforms

Spectrum2D to_spectral(const Field2D& f) {
  Spectrum2D s{f.basis, std::vector<cplx>(f.basis->nc2d())};
  f.basis->forward2d(f.values, s.c);
  return s;
}

Field2D from_spectral(const Spectrum2D& s) {
  Field2D f(s.basis);
  s.basis->inverse2d(s.c, f.values);
  return f;
}

Spectrum3D to_spectral(const Field3D& f) {
  Spectrum3D s{f.basis, f.parity, std::vector<cplx>(f.basis->nc3d())};
  f.basis->forward3d(f.values, f.parity, s.c);
  return s;
}

Field3D from_spectral(const Spectrum3D& s) {
  Field3D f(s.basis, s.parity);
  s.basis->inverse3d(s.c, s.parity, f.values);
  return f;
}

namespace {

// Horizontal multiplier for an operator (excluding the z part).
cplx horizontal_multiplier(const Basis& B, std::size_t idx, DiffOp op) {
  const double lx = B.laplace_x_multiplier()[idx];
  switch (op) {
    case DiffOp::dx1: return B.ik1()[idx];
    case DiffOp::dx2: return B.ik2()[idx];
    case DiffOp::laplace_x: return lx;
    case DiffOp::laplace_x3: return lx * lx * lx;
    case DiffOp::laplace_x5: return lx * lx * lx * lx * lx;
    default: return 1.0;
  }
}

}  // namespace

Field2D diff(const Field2D& f, DiffOp op) {
  if (op == DiffOp::dz) throw UnsupportedAxis("dz is not defined on 2D fields");
  Spectrum2D s = to_spectral(f);
  const Basis& B = *f.basis;
  for (std::size_t idx = 0; idx < s.c.size(); ++idx) {
    cplx mult;
    const double lx = B.laplace_x_multiplier()[idx];
    if (op == DiffOp::laplace) {
      mult = lx;
    } else if (op == DiffOp::bilaplace) {
      mult = lx * lx;
    } else {
      mult = horizontal_multiplier(B, idx, op);
    }
    s.c[idx] *= mult;
  }
  return from_spectral(s);
}

Field3D diff(const Field3D& f, DiffOp op) {
  Spectrum3D s = to_spectral(f);
  const Basis& B = *f.basis;
  const std::size_t nc = B.nc2d();
  const int top = B.top_mode();
  if (op == DiffOp::dz) {
    const double sign = (f.parity == Parity::Even) ? -1.0 : 1.0;
    for (int m = 0; m <= top; ++m) {
      const double mult = (m == 0 || m == top) ? 0.0 : sign * B.z_wavenumber(m);
      for (std::size_t q = 0; q < nc; ++q) s.c[m * nc + q] *= mult;
    }
    s.parity = flip(f.parity);
    return from_spectral(s);
  }
  for (int m = 0; m <= top; ++m) {
    const double zz = B.zz_multiplier()[m];
    for (std::size_t q = 0; q < nc; ++q) {
      cplx mult;
      const double lap = B.laplace_x_multiplier()[q] + zz;
      if (op == DiffOp::laplace) {
        mult = lap;
      } else if (op == DiffOp::bilaplace) {
        mult = lap * lap;
      } else {
        mult = horizontal_multiplier(B, q, op);
      }
      s.c[m * nc + q] *= mult;
    }
  }
  return from_spectral(s);
}

Spectrum2D dealias(Spectrum2D s) {
  const auto& keep = s.basis->keep2d();
  for (std::size_t q = 0; q < s.c.size(); ++q)
    if (!keep[q]) s.c[q] = 0.0;
  return s;
}

Spectrum3D dealias(Spectrum3D s) {
  const Basis& B = *s.basis;
  const std::size_t nc = B.nc2d();
  for (int m = 0; m < B.nz(); ++m) {
    for (std::size_t q = 0; q < nc; ++q) {
      if (!B.keep_m()[m] || !B.keep2d()[q]) s.c[m * nc + q] = 0.0;
    }
  }
  return s;
}

Field2D project(const Field2D& f) { return from_spectral(dealias(to_spectral(f))); }
Field3D project(const Field3D& f) { return from_spectral(dealias(to_spectral(f))); }

double integrate(const Field2D& f) {
  double sum = 0.0;
  for (double v : f.values) sum += v;
  return sum * (kTwoPi * kTwoPi) / static_cast<double>(f.values.size());
}

double integrate(const Field3D& f) {
  const Basis& B = *f.basis;
  const std::size_t plane = B.n2d();
  double total = 0.0;
  for (int k = 0; k < B.nz(); ++k) {
    double sum = 0.0;
    for (std::size_t q = 0; q < plane; ++q) sum += f.values[k * plane + q];
    total += B.z_weights()[k] * sum;
  }
  return total * (kTwoPi * kTwoPi) / static_cast<double>(plane);
}

namespace {

double plane_inner(const Basis& B, const cplx* a, const cplx* b) {
  const int nk1 = B.nk1();
  const int ny = B.nx1() / 2;
  double sum = 0.0;
  for (int j = 0; j < B.nx2(); ++j) {
    for (int k1 = 0; k1 < nk1; ++k1) {
      const std::size_t q = static_cast<std::size_t>(k1) + static_cast<std::size_t>(nk1) * j;
      const double w = (k1 == 0 || k1 == ny) ? 1.0 : 2.0;
      sum += w * (a[q] * std::conj(b[q])).real();
    }
  }
  return sum * kTwoPi * kTwoPi;
}

}  // namespace

double spectral_inner(const Spectrum2D& a, const Spectrum2D& b) {
  require_same_grid(*a.basis, *b.basis);
  return plane_inner(*a.basis, a.c.data(), b.c.data());
}

double spectral_inner(const Spectrum3D& a, const Spectrum3D& b) {
  require_same_grid(*a.basis, *b.basis);
  if (a.parity != b.parity) return 0.0;
  const Basis& B = *a.basis;
  const int top = B.top_mode();
  const std::size_t nc = B.nc2d();
  double total = 0.0;
  for (int m = 0; m <= top; ++m) {
    double w;
    if (a.parity == Parity::Even) {
      w = (m == 0 || m == top) ? B.h() : 0.5 * B.h();
    } else {
      w = (m == 0 || m == top) ? 0.0 : 0.5 * B.h();
    }
    if (w == 0.0) continue;
    total += w * plane_inner(B, a.c.data() + m * nc, b.c.data() + m * nc);
  }
  return total;
}

Field2D evaluate_at_height(const Spectrum3D& s, double z) {
  const Basis& B = *s.basis;
  const std::size_t nc = B.nc2d();
  Spectrum2D plane{s.basis, std::vector<cplx>(nc, 0.0)};
  for (int m = 0; m < B.nz(); ++m) {
    const double arg = B.z_wavenumber(m) * z;
    const double phi = (s.parity == Parity::Even) ? std::cos(arg) : std::sin(arg);
    for (std::size_t q = 0; q < nc; ++q) plane.c[q] += s.c[m * nc + q] * phi;
  }
  return from_spectral(plane);
}

namespace {

// Copies the (k1, k2) plane modes shared by two grids.
void copy_plane(const Basis& from, const cplx* src, const Basis& to, cplx* dst) {
  const int lim1 = std::min(from.nx1(), to.nx1()) / 2;
  const int lim2 = std::min(from.nx2(), to.nx2()) / 2;
  const bool same = from.nx1() == to.nx1() && from.nx2() == to.nx2();
  for (int j = 0; j < to.nx2(); ++j) {
    const int k2 = to.wavenumber2(j);
    if (!same && std::abs(k2) >= lim2) continue;
    const int jf = k2 >= 0 ? k2 : k2 + from.nx2();
    for (int k1 = 0; k1 < to.nk1(); ++k1) {
      if (!same && k1 >= lim1) continue;
      dst[static_cast<std::size_t>(k1) + static_cast<std::size_t>(to.nk1()) * j] =
          src[static_cast<std::size_t>(k1) + static_cast<std::size_t>(from.nk1()) * jf];
    }
  }
}

}  // namespace

Spectrum2D resample(const Spectrum2D& s, const BasisPtr& target) {
  Spectrum2D out{target, std::vector<cplx>(target->nc2d(), 0.0)};
  copy_plane(*s.basis, s.c.data(), *target, out.c.data());
  return out;
}

Spectrum3D resample(const Spectrum3D& s, const BasisPtr& target) {
  if (std::abs(s.basis->h() - target->h()) > 1e-15) throw ShapeMismatch("resample across heights");
  Spectrum3D out{target, s.parity, std::vector<cplx>(target->nc3d(), 0.0)};
  const int from_top = s.basis->top_mode();
  const int to_top = target->top_mode();
  const int mlim = (from_top == to_top) ? to_top : std::min(from_top, to_top) - 1;
  for (int m = 0; m <= mlim; ++m) {
    copy_plane(*s.basis, s.c.data() + m * s.basis->nc2d(), *target,
               out.c.data() + m * target->nc2d());
  }
  return out;
}

VField3D operator+(VField3D a, const VField3D& b) { return a += b; }
VField3D operator-(VField3D a, const VField3D& b) {
  a.c1 -= b.c1;
  a.c2 -= b.c2;
  return a;
}
VField3D operator*(double s, VField3D a) { return a *= s; }

VField3D zero_vfield(const BasisPtr& b) {
  return {Field3D(b, Parity::Even), Field3D(b, Parity::Even)};
}

VField3D project(const VField3D& f) { return {project(f.c1), project(f.c2)}; }

double integrate_dot(const VField3D& a, const VField3D& b) {
  return integrate(a.c1 * b.c1) + integrate(a.c2 * b.c2);
}

double l2_norm(const VField3D& f) { return std::sqrt(std::max(0.0, integrate_dot(f, f))); }

double l2_norm(const Field2D& f) { return std::sqrt(std::max(0.0, integrate(f * f))); }

VField2D grad_x(const Field2D& f) { return {diff(f, DiffOp::dx1), diff(f, DiffOp::dx2)}; }

VField3D grad_x_broadcast(const Field2D& f) {
  return {broadcast(diff(f, DiffOp::dx1)), broadcast(diff(f, DiffOp::dx2))};
}

Field2D div_x(const VField2D& f) { return diff(f.c1, DiffOp::dx1) + diff(f.c2, DiffOp::dx2); }

Field3D div_x(const VField3D& f) { return diff(f.c1, DiffOp::dx1) + diff(f.c2, DiffOp::dx2); }

}  // namespace cpe
