#include "cpe/hydrostatic.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "cpe/errors.hpp"

namespace cpe {

namespace {

void require_positive(const Field2D& xi, double floor) {
  const double mn = xi.min();
  if (!(mn > floor)) throw DensityNonPositive(mn, floor);
}

Field2D trapezoid_average(const Field3D& f) {
  const Basis& B = *f.basis;
  Field2D out(f.basis);
  const std::size_t plane = B.n2d();
  for (int k = 0; k < B.nz(); ++k) {
    const double w = B.z_weights()[k] / B.h();
    for (std::size_t q = 0; q < plane; ++q) out.values[q] += w * f.values[k * plane + q];
  }
  return out;
}

// Sine series of int_0^z (f - fbar): coefficient a_m -> a_m h / (m pi).
Field3D fluctuation_antiderivative(const Field3D& f) {
  Spectrum3D s = to_spectral(f);
  const Basis& B = *f.basis;
  const std::size_t nc = B.nc2d();
  const int top = B.top_mode();
  Spectrum3D out{f.basis, Parity::Odd, std::vector<cplx>(s.c.size(), 0.0)};
  for (int m = 1; m < top; ++m) {
    const double scale = 1.0 / B.z_wavenumber(m);
    for (std::size_t q = 0; q < nc; ++q) out.c[m * nc + q] = s.c[m * nc + q] * scale;
  }
  return from_spectral(out);
}

Field3D divide(const Field3D& f, const Field2D& xi) {
  Field3D out = f;
  const std::size_t plane = xi.values.size();
  for (std::size_t q = 0; q < out.values.size(); ++q) out.values[q] /= xi.values[q % plane];
  return out;
}

}  // namespace

VField2D vertical_average(const VField3D& u) {
  return {trapezoid_average(u.c1), trapezoid_average(u.c2)};
}

VField3D vertical_fluctuation_antiderivative(const VField3D& u) {
  return {fluctuation_antiderivative(u.c1), fluctuation_antiderivative(u.c2)};
}

CumulativeVelocity vertical_cumulative(const VField3D& u) {
  const Basis& B = *u.c1.basis;
  const VField2D ubar = vertical_average(u);
  const VField3D fluct = vertical_fluctuation_antiderivative(u);
  CumulativeVelocity out{u.c1.basis, fluct.c1.values, fluct.c2.values};
  const std::size_t plane = B.n2d();
  for (int k = 0; k < B.nz(); ++k) {
    const double z = B.z(k);
    for (std::size_t q = 0; q < plane; ++q) {
      out.c1[k * plane + q] += z * ubar.c1.values[q];
      out.c2[k * plane + q] += z * ubar.c2.values[q];
    }
  }
  return out;
}

Field3D reconstruct_w(const Field2D& xi, const VField3D& u, double floor) {
  require_positive(xi, floor);
  // utilde - z ubar is a pure sine series, so w is odd in z by construction.
  const VField3D s = vertical_fluctuation_antiderivative(u);
  Field3D flux_div = diff(xi * s.c1, DiffOp::dx1) + diff(xi * s.c2, DiffOp::dx2);
  flux_div *= -1.0;
  return divide(flux_div, xi);
}

Field3D reconstruct_dz_w(const Field2D& xi, const VField3D& u, double floor) {
  require_positive(xi, floor);
  const VField2D ubar = vertical_average(u);
  const Field3D div_full = diff(xi * u.c1, DiffOp::dx1) + diff(xi * u.c2, DiffOp::dx2);
  const Field2D div_mean = diff(xi * ubar.c1, DiffOp::dx1) + diff(xi * ubar.c2, DiffOp::dx2);
  return divide(broadcast(div_mean) - div_full, xi);
}

double height_for(double h) { return -std::log1p(-h); }

LiftedState lift_to_original(const ReducedState& state, double H, int ny) {
  const BasisPtr& Bp = state.xi.basis;
  const Basis& B = *Bp;
  if (std::abs(B.h() - (-std::expm1(-H))) > 1e-12) {
    throw HeightMismatch("h = " + std::to_string(B.h()) + " does not equal 1 - e^{-H} for H = " +
                         std::to_string(H));
  }
  if (ny < 9 || ny % 2 == 0) throw InvalidSpec("ny must be odd and >= 9");

  LiftedState out;
  out.basis = Bp;
  out.t = state.t;
  out.H = H;
  out.ny = ny;
  out.v_amplification = std::exp(H);
  const std::size_t plane = B.n2d();
  const std::size_t total = plane * static_cast<std::size_t>(ny);
  out.y.resize(ny);
  out.rho.resize(total);
  out.u1.resize(total);
  out.u2.resize(total);
  out.v.resize(total);

  const Spectrum3D su1 = to_spectral(state.u.c1);
  const Spectrum3D su2 = to_spectral(state.u.c2);
  const Spectrum3D sw = to_spectral(reconstruct_w(state.xi, state.u));
  for (int iy = 0; iy < ny; ++iy) {
    const double y = H * iy / (ny - 1);
    out.y[iy] = y;
    const double z = std::min(B.h(), -std::expm1(-y));
    const double decay = std::exp(-y);
    const Field2D a1 = evaluate_at_height(su1, z);
    const Field2D a2 = evaluate_at_height(su2, z);
    const Field2D w = evaluate_at_height(sw, z);
    for (std::size_t q = 0; q < plane; ++q) {
      const std::size_t idx = out.index(q, iy);
      out.rho[idx] = state.xi.values[q] * decay;
      out.u1[idx] = a1.values[q];
      out.u2[idx] = a2.values[q];
      out.v[idx] = w.values[q] / decay;
    }
  }
  return out;
}

namespace {

// Degree-8 Lagrange interpolation in y on the uniform lifted grid.
std::array<double, 9> lagrange_weights(const std::vector<double>& y, int start, double at) {
  std::array<double, 9> w{};
  for (int a = 0; a < 9; ++a) {
    double l = 1.0;
    for (int b = 0; b < 9; ++b) {
      if (b != a) l *= (at - y[start + b]) / (y[start + a] - y[start + b]);
    }
    w[a] = l;
  }
  return w;
}

}  // namespace

ReducedState reduce_from_original(const LiftedState& lifted) {
  const BasisPtr& Bp = lifted.basis;
  const Basis& B = *Bp;
  const std::size_t plane = B.n2d();
  ReducedState out;
  out.t = lifted.t;
  out.xi = Field2D(Bp);
  for (std::size_t q = 0; q < plane; ++q) out.xi.values[q] = lifted.rho[lifted.index(q, 0)];
  out.u = zero_vfield(Bp);
  const double dy = lifted.H / (lifted.ny - 1);
  for (int k = 0; k < B.nz(); ++k) {
    const double z = B.z(k);
    const double y = (k == B.nz() - 1) ? lifted.H : -std::log1p(-z);
    const int centre = static_cast<int>(std::lround(y / dy));
    const int start = std::clamp(centre - 4, 0, lifted.ny - 9);
    const auto w = lagrange_weights(lifted.y, start, y);
    for (std::size_t q = 0; q < plane; ++q) {
      double a1 = 0.0, a2 = 0.0;
      for (int a = 0; a < 9; ++a) {
        const std::size_t idx = lifted.index(q, start + a);
        a1 += w[a] * lifted.u1[idx];
        a2 += w[a] * lifted.u2[idx];
      }
      out.u.c1.values[k * plane + q] = a1;
      out.u.c2.values[k * plane + q] = a2;
    }
  }
  return out;
}

double hydrostatic_residual(const LiftedState& lifted) {
  // Sixth-order central stencil in the interior, one-sided near the ends.
  static constexpr double central[7] = {-1.0 / 60, 3.0 / 20, -3.0 / 4, 0.0, 3.0 / 4, -3.0 / 20, 1.0 / 60};
  static constexpr double forward[7] = {-49.0 / 20, 6.0, -15.0 / 2, 20.0 / 3, -15.0 / 4, 6.0 / 5, -1.0 / 6};
  const std::size_t plane = lifted.basis->n2d();
  const int ny = lifted.ny;
  const double dy = lifted.H / (ny - 1);
  double worst = 0.0;
  for (std::size_t q = 0; q < plane; ++q) {
    for (int iy = 0; iy < ny; ++iy) {
      double dp = 0.0;
      if (iy >= 3 && iy < ny - 3) {
        for (int a = 0; a < 7; ++a) dp += central[a] * lifted.pressure(lifted.index(q, iy - 3 + a));
      } else if (iy < 3) {
        for (int a = 0; a < 7; ++a) dp += forward[a] * lifted.pressure(lifted.index(q, iy + a));
      } else {
        for (int a = 0; a < 7; ++a) dp -= forward[a] * lifted.pressure(lifted.index(q, iy - a));
      }
      dp /= dy;
      worst = std::max(worst, std::abs(dp + lifted.rho[lifted.index(q, iy)]));
    }
  }
  return worst;
}

double lifted_mass(const LiftedState& lifted) {
  const std::size_t plane = lifted.basis->n2d();
  const int ny = lifted.ny;
  const double dy = lifted.H / (ny - 1);
  double total = 0.0;
  for (int iy = 0; iy < ny; ++iy) {
    const double w = (iy == 0 || iy == ny - 1) ? 1.0 : (iy % 2 == 1 ? 4.0 : 2.0);
    double sum = 0.0;
    for (std::size_t q = 0; q < plane; ++q) sum += lifted.rho[lifted.index(q, iy)];
    total += w * sum;
  }
  const double two_pi = 2.0 * M_PI;
  return total * dy / 3.0 * two_pi * two_pi / static_cast<double>(plane);
}

}  // namespace cpe
