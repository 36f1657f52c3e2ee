/// @file hydrostatic.hpp
/// @brief Reduced (xi, u, w) variables, vertical-velocity reconstruction and
/// the change of variables back to the stratified (rho, u, v) description.
#pragma once

#include <vector>

#include "cpe/spectral.hpp"

namespace cpe {

/// Reduced state: z-independent density xi and horizontal velocity u.
struct ReducedState {
  double t = 0.0;
  Field2D xi;
  VField3D u;

  const BasisPtr& basis() const { return xi.basis; }
};

/// Grid values of the vertical antiderivative int_0^z u. Not a pure cosine or
/// sine series (it carries a linear part), so only grid values are exposed.
struct CumulativeVelocity {
  BasisPtr basis;
  std::vector<double> c1, c2;
};

/// (1/h) int_0^h u dz per component.
VField2D vertical_average(const VField3D& u);

/// int_0^z u dtau, computed termwise on the cosine series.
CumulativeVelocity vertical_cumulative(const VField3D& u);

/// int_0^z (u - ubar) dtau as a sine series. Vanishes at z = 0 and z = h.
VField3D vertical_fluctuation_antiderivative(const VField3D& u);

/// w = -div_x(xi utilde)/xi + z div_x(xi ubar)/xi. Odd parity; zero at both
/// ends. Throws DensityNonPositive if min xi <= floor.
Field3D reconstruct_w(const Field2D& xi, const VField3D& u, double floor = 1e-8);

/// dz w = -div_x(xi u)/xi + div_x(xi ubar)/xi, evaluated from its own
/// closed form rather than by differentiating reconstruct_w.
Field3D reconstruct_dz_w(const Field2D& xi, const VField3D& u, double floor = 1e-8);

/// Stratified variables on T^2 x (0, H): rho = xi e^{-y}, u(x, y) and
/// v = e^{y} w with z = 1 - e^{-y}. Arrays are x-fastest, then y.
struct LiftedState {
  BasisPtr basis;
  double t = 0.0;
  double H = 0.0;
  int ny = 0;
  std::vector<double> y;
  std::vector<double> rho;
  std::vector<double> u1, u2;
  std::vector<double> v;
  /// e^{H}: worst-case amplification of w errors in v near the top.
  double v_amplification = 1.0;

  std::size_t index(std::size_t q, int iy) const { return q + basis->n2d() * iy; }
  /// Hydrostatic pressure P(rho) = rho (g = c^2 = 1).
  double pressure(std::size_t idx) const { return rho[idx]; }
};

/// Throws HeightMismatch if |h - (1 - e^{-H})| > 1e-12 and InvalidSpec for
/// ny < 9 or even ny.
LiftedState lift_to_original(const ReducedState& state, double H, int ny = 513);

/// Reads xi = rho(., y = 0) and resamples u back onto the z grid.
ReducedState reduce_from_original(const LiftedState& lifted);

/// max |dP/dy + rho| over the lifted grid (sixth-order differences in y).
double hydrostatic_residual(const LiftedState& lifted);

/// int rho dx dy (composite Simpson in y).
double lifted_mass(const LiftedState& lifted);

/// H such that 1 - e^{-H} = h.
double height_for(double h);

}  // namespace cpe
