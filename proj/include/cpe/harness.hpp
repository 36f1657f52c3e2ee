/// @file harness.hpp
/// @brief Initial-data presets, the simulation driver, parameter continuation
/// studies and manufactured-solution verification.
#pragma once

#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "cpe/diagnostics.hpp"

namespace cpe {

/// Preset names: constant, density_relax, shear, column, random.
const std::vector<std::string>& preset_names();

struct InitialData {
  std::string preset;
  double amplitude = 0.1;
  double floor = 0.1;  ///< required lower bound on xi0
  std::uint64_t seed = 0;
  ReducedState state;

  /// Throws ValidationError if min xi0 < floor or E0, BD0 are not finite.
  void validate(const Params& params) const;
};

/// Band-limited preset on basis B. amplitude < 0 selects the preset default.
/// Throws ValidationError for an unknown name.
InitialData make_preset(const std::string& name, const BasisPtr& B, double amplitude = -1.0,
                        double floor = 0.1, std::uint64_t seed = 0);

/// Wraps a loaded state (for example from a snapshot).
InitialData from_state(ReducedState state, double floor = 0.1);

struct RunOptions {
  double dt = 2.5e-4;
  double t_end = 0.1;
  int record_stride = 1;
  bool with_identities = false;
  StepOptions step;
  /// Called after every completed step with the new state and step index (1-based).
  std::function<void(const ReducedState&, long)> observer;
};

struct RunResult {
  ReducedState final_state;
  std::vector<DiagnosticsRecord> records;
  DensityBounds bounds;
  long steps_completed = 0;
  long steps_planned = 0;
  /// Index of the step that failed (0-based), -1 when the run completed.
  long failed_step = -1;
  std::string error_message;
  std::exception_ptr error;

  bool ok() const { return failed_step < 0; }
  /// Rethrows the original stepper exception, if any.
  void rethrow() const;
};

/// Steps t_end / dt times (which must be an integer up to 1e-9 relative) from
/// init, recording diagnostics at step 0, every record_stride steps and at the
/// end. On a stepper error the run stops and the partial result is returned.
RunResult run_simulation(const InitialData& init, const Params& params, const RunOptions& options);

/// E(s1) + dt sum D(s1) - E(s0) for one step s0 -> s1; nonpositive when the step
/// dissipates at least what the diagnostics account for.
double step_balance_residual(const ReducedState& s0, const Params& params, double dt,
                             const StepOptions& options = {});

enum class Stage { eps_mu, eta, kappa_delta_r0 };

std::string_view stage_name(Stage s);
/// Throws ValidationError("stage", ...) for unknown names.
Stage parse_stage(std::string_view name);

struct ContinuationSchedule {
  Stage stage = Stage::eps_mu;
  double factor = 2.0;
  int rungs = 4;
  Params base_params;
  double horizon = 0.5;
  double dt = 2.5e-4;
  StepOptions step;
  bool parallel = true;

  void validate() const;
};

/// base_params with the staged coefficients divided by factor^rung.
Params rung_params(const ContinuationSchedule& schedule, int rung);

/// Time-integrated vanishing monitors, in column order.
const std::vector<std::string>& monitor_names();

struct RungResult {
  int rung = 0;
  Params params;
  bool ok = true;
  std::string error;
  ReducedState final_state;
  /// ||xi_p - xi_{p-1}|| and ||(sqrt(xi) u)_p - (sqrt(xi) u)_{p-1}||; NaN for rung 0
  /// or when either rung failed.
  double diff_xi = std::numeric_limits<double>::quiet_NaN();
  double diff_momentum = std::numeric_limits<double>::quiet_NaN();
  std::vector<Named> monitors;
};

struct ContinuationTable {
  Stage stage = Stage::eps_mu;
  std::vector<RungResult> rows;
};

ContinuationTable continuation_study(const ContinuationSchedule& schedule, const InitialData& init);

/// Checks that stages of a chained study come in the order eps_mu, eta,
/// kappa_delta_r0. Throws ValidationError otherwise.
void require_stage_order(const std::vector<Stage>& stages);

/// xi* = a + b e^{-t} cos x1, u* = (c e^{-t} sin x1 cos(pi z / h), 0).
struct ManufacturedTarget {
  double a = 1.0;
  double b = 0.5;
  double c = 0.5;

  Field2D xi(const BasisPtr& B, double t) const;
  VField3D u(const BasisPtr& B, double t) const;
};

struct MmsOptions {
  ManufacturedTarget target;
  /// Temporal study: continuous-time sources on the run grid, so the error is
  /// the time-discretization error alone.
  std::vector<double> dt_list = {2e-4, 1e-4};
  double t_end = 0.02;
  /// Spatial study: discrete-step sources evaluated on a grid oversampled by
  /// `oversample` and truncated to each resolution, so the error is spatial alone.
  std::vector<int> resolutions = {16, 32};
  double spatial_dt = 2.5e-4;
  double spatial_t_end = 0.0125;
  int oversample = 2;
  StepOptions step;
};

struct MmsRow {
  int nx = 0;
  double dt = 0.0;
  double error_xi = 0.0;
  double error_u = 0.0;
  double error = 0.0;  ///< error_xi + error_u
};

struct MmsReport {
  std::vector<MmsRow> temporal;
  std::vector<MmsRow> spatial;
  /// error(dt_i) / error(dt_{i+1}) for consecutive entries of dt_list.
  std::vector<double> temporal_ratios;
  /// error at the first resolution over error at the last.
  double spatial_ratio = 0.0;
};

/// Runs the manufactured-solution study on grid `spec` (its nx1, nx2 are
/// replaced by each resolution in the spatial study).
MmsReport manufactured_solution_test(const DomainSpec& spec, const Params& params,
                                     const MmsOptions& options = {});

}  // namespace cpe
