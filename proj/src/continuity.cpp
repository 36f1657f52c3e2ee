#include "cpe/continuity.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "cpe/errors.hpp"
#include "cpe/hydrostatic.hpp"

namespace cpe {

Field2D continuity_rhs(const Field2D& xi, const VField2D& ubar, double eps) {
  if (eps < 0.0) throw InvalidSpec("eps must be nonnegative");
  const Field2D flux_div = div_x(VField2D{project(xi * ubar.c1), project(xi * ubar.c2)});
  Field2D out = diff(xi, DiffOp::laplace_x);
  out *= eps;
  out -= flux_div;
  return out;
}

void check_advective_cfl(const VField2D& ubar, double dt) {
  const Basis& B = *ubar.c1.basis;
  double umax = 0.0;
  for (std::size_t q = 0; q < B.n2d(); ++q) {
    umax = std::max(umax, std::abs(ubar.c1.values[q]));
    umax = std::max(umax, std::abs(ubar.c2.values[q]));
  }
  const double dx = 2.0 * std::numbers::pi / std::max(B.nx1(), B.nx2());
  if (dt * umax > 0.5 * dx) {
    std::ostringstream os;
    os << "dt = " << dt << " exceeds 0.5 dx / max|ubar| = " << 0.5 * dx / umax;
    throw CFLViolation(os.str());
  }
}

Field2D continuity_step_mean(const Field2D& xi, const VField2D& ubar, double eps, double dt,
                             double floor, const Field2D* source) {
  if (!(dt > 0.0)) throw InvalidSpec("dt must be positive");
  const Basis& B = *xi.basis;
  Field2D explicit_part = div_x(VField2D{project(xi * ubar.c1), project(xi * ubar.c2)});
  explicit_part *= -dt;
  explicit_part += xi;
  if (source) explicit_part += dt * *source;
  Spectrum2D s = to_spectral(explicit_part);
  const auto& lap = B.laplace_x_multiplier();
  for (std::size_t q = 0; q < s.c.size(); ++q) s.c[q] /= 1.0 - eps * dt * lap[q];
  Field2D out = from_spectral(s);
  const double mn = out.min();
  if (!(mn > floor)) throw DensityNonPositive(mn, floor);
  return out;
}

Field2D continuity_step(const Field2D& xi, const VField3D& u, double eps, double dt, double floor) {
  const VField2D ubar = vertical_average(u);
  check_advective_cfl(ubar, dt);
  return continuity_step_mean(xi, ubar, eps, dt, floor);
}

DensityBounds DensityBounds::from_initial(const Field2D& xi0) {
  DensityBounds b;
  b.lower0 = b.lower = xi0.min();
  b.upper0 = b.upper = xi0.max();
  return b;
}

DensityBounds update_bounds(const DensityBounds& bounds, const VField2D& ubar, double dt) {
  DensityBounds out = bounds;
  out.accumulated_divnorm += dt * div_x(ubar).max_abs();
  out.lower = out.lower0 * std::exp(-out.accumulated_divnorm);
  out.upper = out.upper0 * std::exp(out.accumulated_divnorm);
  return out;
}

}  // namespace cpe
