/// @file diagnostics.hpp
/// @brief Mass, energy, BD entropy, dissipation integrals, identity residuals
/// and the time-integrated inequality checks.
#pragma once

#include <string>
#include <vector>

#include "cpe/continuity.hpp"
#include "cpe/hydrostatic.hpp"
#include "cpe/momentum.hpp"

namespace cpe {

struct Named {
  std::string name;
  double value = 0.0;
  bool operator==(const Named&) const = default;
};

/// Looks up a value by name; throws std::out_of_range if absent.
double lookup(const std::vector<Named>& list, const std::string& name);

struct DiagnosticsRecord {
  double t = 0.0;
  double mass = 0.0;
  double energy = 0.0;
  double bd_entropy = 0.0;
  double min_xi = 0.0;
  double max_xi = 0.0;
  double bound_lower = 0.0;
  double bound_upper = 0.0;
  std::vector<Named> dissipation;
  std::vector<Named> bd_dissipation;
  std::vector<Named> identity_residuals;

  bool operator==(const DiagnosticsRecord&) const = default;
};

/// Names in record order.
const std::vector<std::string>& dissipation_names();
const std::vector<std::string>& bd_dissipation_names();
const std::vector<std::string>& identity_residual_names();

/// int_{T^2} xi.
double mass(const Field2D& xi);

/// int_Omega 1/2 xi |u|^2 + xi ln xi - xi + 1 + eta/11 xi^-10 + kappa |grad sqrt xi|^2
/// + delta/2 |grad lap^2 xi|^2.
double energy(const ReducedState& state, const Params& params);

/// Energy dissipation integrals (all >= 0 up to roundoff).
std::vector<Named> dissipation(const ReducedState& state, const Params& params);

/// int_Omega 1/2 xi |u + 2 nu1 grad ln xi|^2 - 2 nu1 r0 ln xi.
double bd_entropy(const ReducedState& state, const Params& params);

/// Dissipation terms on the left of the BD entropy inequality.
std::vector<Named> bd_dissipation(const ReducedState& state, const Params& params);

/// Residuals of exact identities:
///   bd_cross: |int div(xi A(u)) . grad ln xi|
///   quantum: ||2 xi grad(lap sqrt xi / sqrt xi) - div(xi hess ln xi)||, evaluated on a
///            horizontally oversampled grid (factor `oversample`)
///   norm_split: |int xi |grad u|^2 - int xi |D|^2 - int xi |A|^2|
///   w_closure: ||dzz w + dz div(xi u) / xi||
std::vector<Named> identity_residuals(const ReducedState& state, const Params& params,
                                      int oversample = 8);

/// bd_cross evaluated with the chain-rule gradient grad xi / xi instead of the
/// spectral gradient of ln xi; sensitive to aliasing in the quotient.
double bd_cross_chain_rule(const Field2D& xi, const VField3D& u);

/// Full record. identity residuals are skipped when with_identities is false.
DiagnosticsRecord diagnose(const ReducedState& state, const Params& params,
                           const DensityBounds& bounds, bool with_identities = true);

struct InequalityOptions {
  double energy_rel_slack = 1e-6;
  double bd_slack = 0.0;
};

struct InequalityReport {
  /// max over records of (E(t) + int D) - E0 (1 + slack); <= 0 means satisfied.
  double energy_violation = 0.0;
  /// max over records of (BD(t) + int D_BD) - (BD0 + E0 + bd_slack).
  double bd_violation = 0.0;
  /// max relative excess (E(t) + int D - E0) / E0, slack not applied.
  double energy_excess = 0.0;
  bool energy_ok = true;
  bool bd_ok = true;
  long first_energy_violation = -1;
  long first_bd_violation = -1;
};

/// Time integrals use the right-endpoint rule over consecutive records.
InequalityReport check_inequalities(const std::vector<DiagnosticsRecord>& records, double E0,
                                    double BD0, const InequalityOptions& options = {});

/// Sum of the values in a named list.
double total(const std::vector<Named>& list);

}  // namespace cpe
