/// @file continuity.hpp
/// @brief Regularized mass equation xi_t + div_x(xi ubar) = eps lap_x xi and
/// pointwise density envelopes.
#pragma once

#include "cpe/spectral.hpp"

namespace cpe {

/// eps lap_x xi - div_x(P(xi ubar)).
Field2D continuity_rhs(const Field2D& xi, const VField2D& ubar, double eps);

/// Throws CFLViolation unless dt <= 0.5 dx / max|ubar|.
void check_advective_cfl(const VField2D& ubar, double dt);

/// One IMEX step with ubar given: explicit advection of the dealiased flux
/// P(xi ubar), diagonal implicit diffusion, optional source added to the
/// explicit part. Throws DensityNonPositive if the new minimum is <= floor.
Field2D continuity_step_mean(const Field2D& xi, const VField2D& ubar, double eps, double dt,
                             double floor = 1e-8, const Field2D* source = nullptr);

/// Same, with ubar computed from u by vertical averaging. Checks the CFL
/// condition first.
Field2D continuity_step(const Field2D& xi, const VField3D& u, double eps, double dt,
                        double floor = 1e-8);

/// lower = min(xi0) e^{-A}, upper = max(xi0) e^{A}, A = int_0^t max|div ubar|.
struct DensityBounds {
  double lower0 = 1.0;
  double upper0 = 1.0;
  double accumulated_divnorm = 0.0;
  double lower = 1.0;
  double upper = 1.0;

  static DensityBounds from_initial(const Field2D& xi0);
};

DensityBounds update_bounds(const DensityBounds& bounds, const VField2D& ubar, double dt);

}  // namespace cpe
