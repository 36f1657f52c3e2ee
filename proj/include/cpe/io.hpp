/// @file io.hpp
/// @brief Run configuration, diagnostics CSV, "CPE1" snapshots and the
/// command-line entry point.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "cpe/harness.hpp"

namespace cpe {

struct RunConfig {
  DomainSpec grid{16, 16, 9, 0.5};
  Params params;
  double dt = 2.5e-4;
  double t_end = 0.1;
  int record_stride = 1;
  bool identities = false;  ///< compute identity residuals in every record
  std::string init_preset = "density_relax";
  double init_amplitude = -1.0;  ///< < 0 selects the preset default
  double init_floor = 0.1;
  std::string init_snapshot;  ///< overrides the preset when set
  std::string output_directory = "output";
  std::vector<std::string> output_formats = {"csv", "snapshot"};
  std::uint64_t seed = 0;
  std::string continuation_stage = "eps_mu";
  int continuation_rungs = 4;
  double continuation_factor = 2.0;
  double continuation_horizon = 0.5;
  double mms_dt = 2e-4;  ///< temporal study uses mms_dt and mms_dt / 2
  double mms_t_end = 0.02;
  double mms_spatial_dt = 2.5e-4;
  double mms_spatial_t_end = 0.0125;
  int mms_oversample = 2;

  /// Throws ValidationError(key, reason).
  void validate() const;
  bool operator==(const RunConfig&) const = default;
};

/// Flat "section.key = value" lines, '#' starts a comment. Missing keys take
/// their defaults; grid.nx2 defaults to grid.nx1. Throws ParseError for
/// malformed lines, unknown or repeated keys and bad values, ValidationError
/// for out-of-range values.
RunConfig parse_config(std::string_view text);
/// Reads and parses a file; IOError if it cannot be read.
RunConfig load_config(const std::string& path);
/// Every key, one per line, in a fixed order; parse_config inverts it exactly.
std::string serialize_config(const RunConfig& config);

/// Column names in file order: t, mass, energy, bd_entropy, min_xi, max_xi,
/// bound_lower, bound_upper, dissipation terms, BD dissipation terms, identity residuals.
std::vector<std::string> diagnostics_columns();
/// CSV text with 17 significant digits; missing identity residuals are empty cells.
std::string format_diagnostics(const std::vector<DiagnosticsRecord>& records);
std::vector<DiagnosticsRecord> parse_diagnostics(std::string_view text);
/// Atomic write (temporary file + rename). Throws IOError.
void write_diagnostics(const std::vector<DiagnosticsRecord>& records, const std::string& path);
/// Throws IOError, SchemaError on a header that differs from diagnostics_columns().
std::vector<DiagnosticsRecord> read_diagnostics(const std::string& path);

inline constexpr std::uint32_t kSnapshotVersion = 1;

struct Snapshot {
  ReducedState state;
  Params params;
};

/// Little-endian "CPE1" layout: magic, version u32, nx1 nx2 nz u32, h t f64,
/// params f64 in kParamNames order, payload (xi, u1, u2 in grid order), CRC32
/// of the payload.
std::string encode_snapshot(const ReducedState& state, const Params& params);
/// Throws BadMagic, VersionUnsupported, ChecksumMismatch or IOError (short data).
Snapshot decode_snapshot(std::string_view bytes);
void write_snapshot(const ReducedState& state, const Params& params, const std::string& path);
Snapshot read_snapshot(const std::string& path);

/// Whole-file helpers. Throw IOError.
std::string read_file(const std::string& path);
void write_file_atomic(const std::string& path, std::string_view data);

/// Subcommands run, check, continuation, mms, info. Returns 0 on success, 1 on
/// invalid input, 2 on solver failure.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cpe
