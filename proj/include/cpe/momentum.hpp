/// @file momentum.hpp
/// @brief Force terms of the regularized momentum balance, the xi-weighted
/// mass operator and the Picard-iterated implicit time step.
#pragma once

#include <array>
#include <string_view>

#include "cpe/hydrostatic.hpp"
#include "cpe/spectral.hpp"

namespace cpe {

struct Params {
  double nu1 = 0.1;    ///< horizontal viscosity coefficient
  double nu2 = 0.1;    ///< vertical viscosity coefficient
  double r = 1.0;      ///< quadratic damping
  double r0 = 1e-2;    ///< linear drag
  double eps = 1e-2;   ///< density diffusion
  double mu = 1e-2;    ///< hyperviscosity
  double eta = 1e-3;   ///< cold pressure
  double kappa = 1e-4; ///< quantum (Bohm) coefficient
  double delta = 1e-4; ///< high-order density regularization
  double density_floor = 1e-8;

  /// Throws ValidationError naming the offending field.
  void validate() const;
  bool operator==(const Params&) const = default;
};

/// Field names in the fixed order used by configs and snapshots.
inline constexpr std::array<std::string_view, 10> kParamNames = {
    "nu1", "nu2", "r", "r0", "eps", "mu", "eta", "kappa", "delta", "density_floor"};
double& param_ref(Params& p, std::size_t i);
double param_value(const Params& p, std::size_t i);

struct ForceBreakdown {
  VField3D convection_x, convection_z, pressure, drag_r0, damping_r, hyperviscosity_mu,
      horizontal_viscosity, vertical_viscosity, eps_commutator, cold_pressure_eta,
      quantum_kappa, highorder_delta;

  static constexpr std::array<std::string_view, 12> names = {
      "convection_x",         "convection_z",       "pressure",       "drag_r0",
      "damping_r",            "hyperviscosity_mu",  "horizontal_viscosity",
      "vertical_viscosity",   "eps_commutator",     "cold_pressure_eta",
      "quantum_kappa",        "highorder_delta"};
  VField3D& part(std::size_t i);
  const VField3D& part(std::size_t i) const;
  VField3D total() const;
};

/// 2x2 tensor of z-dependent fields, entry (i, j) = a[i][j].
struct Tensor2 {
  std::array<std::array<Field3D, 2>, 2> a;
};

struct Strain {
  Tensor2 D;  ///< symmetric part of grad_x u
  Tensor2 A;  ///< antisymmetric part
};

Tensor2 grad_x(const VField3D& u);
Strain strain(const VField3D& u);
/// int f |T|^2 over the slab for a z-independent weight f.
double weighted_norm2(const Field2D& f, const Tensor2& T);

/// Divergence form (kappa/2) div_x(xi hess_x ln xi). Throws DensityNonPositive.
VField2D quantum_force(const Field2D& xi, double kappa, double floor = 1e-8);
/// Direct form kappa xi grad_x(lap_x sqrt(xi) / sqrt(xi)).
VField2D quantum_force_direct(const Field2D& xi, double kappa, double floor = 1e-8);

/// Every term of the momentum right-hand side at a single state, products
/// dealiased, w reconstructed from (xi, u).
ForceBreakdown momentum_rhs(const ReducedState& state, const Params& params);

/// dz(xi u w) from the expanded flux form
/// -div(xi ut (x) u) + xi ut . grad u + z div(xi ubar (x) u) - z xi ubar . grad u
/// with ut = int_0^z u. Diagnostic counterpart of convection_z.
VField3D convection_z_expanded(const Field2D& xi, const VField3D& u);

/// Energy-consistent forces used by the stepper: pressure-type terms act as
/// -xi_old grad P(mu(xi_new)) with P the band projection, viscosity, damping
/// and the eps terms use xi_new, and convection is the skew-symmetric form with
/// mass flux (xi_old u, xi_old w) plus 1/2 u div_x P(xi_old ubar).
ForceBreakdown step_forces(const Field2D& xi_old, const Field2D& xi_new, const VField3D& u,
                           const Params& params);

/// P(xi u).
VField3D apply_mass_operator(const Field2D& xi, const VField3D& u);

struct SolveStats {
  int iterations = 0;
  double residual = 0.0;
};

/// u in the dealiased band with ||P(xi u) - P f|| <= tol ||P f|| (PCG,
/// preconditioned by 1/mean(xi)). Throws NoConvergence after max_iter.
VField3D solve_mass_operator(const Field2D& xi, const VField3D& f, double tol = 1e-12,
                             int max_iter = 500, SolveStats* stats = nullptr);

/// Optional forcing added to the mass and momentum equations (evaluated at
/// the new time level by the caller).
struct StepSources {
  const Field2D* mass = nullptr;
  const VField3D* momentum = nullptr;
};

struct StepOptions {
  double picard_tol = 1e-10;
  int picard_max = 50;
  double cg_tol = 1e-13;
  int cg_max = 500;
  StepSources sources;
};

struct StepReport {
  ReducedState state;
  int picard_iterations = 0;
  int cg_iterations = 0;
};

/// Throws CFLViolation if dt breaks the advective limit or the high-order
/// guard dt |k|max^6 sqrt(delta max xi) <= 0.5, |k|max the largest dealiased
/// horizontal wavenumber magnitude.
void check_step_size(const ReducedState& state, const Params& params, double dt);

StepReport galerkin_step_report(const ReducedState& state, const Params& params, double dt,
                                const StepOptions& options);

ReducedState galerkin_step(const ReducedState& state, const Params& params, double dt,
                           double picard_tol = 1e-10, int picard_max = 50);

}  // namespace cpe
