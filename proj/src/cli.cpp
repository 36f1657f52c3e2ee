#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <ostream>

#include "cpe/errors.hpp"
#include "cpe/io.hpp"

namespace cpe {

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kSolver = 2;

const char* usage =
    "usage: cpe run <config>\n"
    "       cpe check <snapshot>\n"
    "       cpe continuation <config> [--stage eps_mu|eta|kappa_delta_r0] [--rungs N]\n"
    "       cpe mms <config>\n"
    "       cpe info <snapshot|csv>\n";

class UsageError : public Error {
 public:
  using Error::Error;
};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Name of the exception type, for messages of the form "Kind: what".
std::string kind(const std::exception& e) {
#define CPE_KIND(T) \
  if (dynamic_cast<const T*>(&e)) return #T;
  CPE_KIND(ParseError)
  CPE_KIND(ValidationError)
  CPE_KIND(ChecksumMismatch)
  CPE_KIND(BadMagic)
  CPE_KIND(VersionUnsupported)
  CPE_KIND(SchemaError)
  CPE_KIND(IOError)
  CPE_KIND(InvalidSpec)
  CPE_KIND(HeightMismatch)
  CPE_KIND(CFLViolation)
  CPE_KIND(DensityNonPositive)
  CPE_KIND(PicardDiverged)
  CPE_KIND(NoConvergence)
  CPE_KIND(StepError)
  CPE_KIND(UsageError)
#undef CPE_KIND
  return "Error";
}

bool is_solver_error(const std::exception& e) {
  return dynamic_cast<const CFLViolation*>(&e) || dynamic_cast<const DensityNonPositive*>(&e) ||
         dynamic_cast<const PicardDiverged*>(&e) || dynamic_cast<const NoConvergence*>(&e) ||
         dynamic_cast<const StepError*>(&e);
}

std::filesystem::path output_dir(const RunConfig& c) {
  std::filesystem::path dir(c.output_directory);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IOError("cannot create output directory '" + c.output_directory + "'");
  return dir;
}

bool wants(const RunConfig& c, const std::string& format) {
  return std::find(c.output_formats.begin(), c.output_formats.end(), format) != c.output_formats.end();
}

InitialData initial_data(const RunConfig& c) {
  if (!c.init_snapshot.empty()) {
    Snapshot s = read_snapshot(c.init_snapshot);
    if (!(s.state.xi.basis->spec() == c.grid)) {
      throw ValidationError("init.snapshot", "snapshot grid differs from the configured grid");
    }
    return from_state(std::move(s.state), c.init_floor);
  }
  return make_preset(c.init_preset, make_basis(c.grid), c.init_amplitude, c.init_floor, c.seed);
}

const std::string& arg(const std::vector<std::string>& args, std::size_t i) {
  if (i >= args.size()) throw UsageError("missing argument");
  return args[i];
}

int cmd_run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  if (args.size() != 2) throw UsageError("run takes exactly one config path");
  const RunConfig c = load_config(args[1]);
  const InitialData init = initial_data(c);
  RunOptions opt;
  opt.dt = c.dt;
  opt.t_end = c.t_end;
  opt.record_stride = c.record_stride;
  opt.with_identities = c.identities;
  const RunResult r = run_simulation(init, c.params, opt);
  const auto dir = output_dir(c);
  if (wants(c, "csv")) write_diagnostics(r.records, (dir / "diagnostics.csv").string());
  if (wants(c, "snapshot")) write_snapshot(r.final_state, c.params, (dir / "final.cpe").string());
  const auto& R = r.records;
  InequalityOptions io;
  io.bd_slack = 1e-3 * (R[0].bd_entropy + R[0].energy + 1.0);
  const InequalityReport ineq = check_inequalities(R, R[0].energy, R[0].bd_entropy, io);
  if (!r.ok()) {
    err << "error: " << r.error_message << "\n";
    out << "run status=solver_error step=" << r.failed_step << " t=" << num(r.final_state.t) << "\n";
    return kSolver;
  }
  out << "run status=ok steps=" << r.steps_completed << " t=" << num(r.final_state.t)
      << " mass=" << num(R.back().mass) << " energy=" << num(R.back().energy)
      << " energy_ok=" << ineq.energy_ok << " bd_ok=" << ineq.bd_ok << "\n";
  return kOk;
}

int cmd_check(const std::vector<std::string>& args, std::ostream& out, std::ostream&) {
  if (args.size() != 2) throw UsageError("check takes exactly one snapshot path");
  const Snapshot s = read_snapshot(args[1]);
  const DiagnosticsRecord r =
      diagnose(s.state, s.params, DensityBounds::from_initial(s.state.xi), true);
  const auto cols = diagnostics_columns();
  const auto csv = format_diagnostics({r});
  // Reuse the CSV formatting: second line holds the values in column order.
  const std::string values = csv.substr(csv.find('\n') + 1);
  std::size_t start = 0;
  for (const auto& name : cols) {
    const auto comma = values.find_first_of(",\n", start);
    out << name << " = " << values.substr(start, comma - start) << "\n";
    start = comma + 1;
  }
  double worst = 0.0;
  for (const auto& n : r.identity_residuals) worst = std::max(worst, n.value);
  out << "check status=ok t=" << num(r.t) << " mass=" << num(r.mass) << " energy=" << num(r.energy)
      << " max_identity_residual=" << num(worst) << "\n";
  return kOk;
}

int cmd_continuation(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig c = load_config(arg(args, 1));
  for (std::size_t i = 2; i < args.size(); i += 2) {
    const std::string& flag = args[i];
    const std::string& value = arg(args, i + 1);
    if (flag == "--stage") {
      c.continuation_stage = value;
    } else if (flag == "--rungs") {
      try {
        c.continuation_rungs = std::stoi(value);
      } catch (const std::exception&) {
        throw ValidationError("continuation.rungs", "not an integer: '" + value + "'");
      }
    } else {
      throw UsageError("unknown option '" + flag + "'");
    }
  }
  c.validate();
  ContinuationSchedule sc;
  sc.stage = parse_stage(c.continuation_stage);
  sc.rungs = c.continuation_rungs;
  sc.factor = c.continuation_factor;
  sc.horizon = c.continuation_horizon;
  sc.dt = c.dt;
  sc.base_params = c.params;
  const ContinuationTable tab = continuation_study(sc, initial_data(c));

  std::string csv = "rung,ok";
  for (auto name : kParamNames) csv += "," + std::string(name);
  csv += ",diff_xi,diff_momentum";
  for (const auto& m : monitor_names()) csv += "," + m;
  csv += "\n";
  int failures = 0;
  for (const auto& row : tab.rows) {
    csv += std::to_string(row.rung) + "," + (row.ok ? "1" : "0");
    for (std::size_t i = 0; i < kParamNames.size(); ++i) csv += "," + num(param_value(row.params, i));
    csv += "," + num(row.diff_xi) + "," + num(row.diff_momentum);
    for (const auto& m : row.monitors) csv += "," + num(m.value);
    csv += "\n";
    if (!row.ok) {
      ++failures;
      err << "rung " << row.rung << ": " << row.error << "\n";
    }
  }
  const auto path = output_dir(c) / ("continuation_" + c.continuation_stage + ".csv");
  write_file_atomic(path.string(), csv);
  out << "continuation status=" << (failures ? "solver_error" : "ok") << " stage=" << c.continuation_stage
      << " rungs=" << tab.rows.size() << " failed=" << failures << " table=" << path.string() << "\n";
  return failures ? kSolver : kOk;
}

int cmd_mms(const std::vector<std::string>& args, std::ostream& out, std::ostream&) {
  if (args.size() != 2) throw UsageError("mms takes exactly one config path");
  const RunConfig c = load_config(args[1]);
  MmsOptions o;
  o.dt_list = {c.mms_dt, c.mms_dt / 2};
  o.t_end = c.mms_t_end;
  o.resolutions = {c.grid.nx1, 2 * c.grid.nx1};
  o.spatial_dt = c.mms_spatial_dt;
  o.spatial_t_end = c.mms_spatial_t_end;
  o.oversample = c.mms_oversample;
  o.step.picard_tol = 1e-13;
  o.step.picard_max = 100;
  const MmsReport rep = manufactured_solution_test(c.grid, c.params, o);
  std::string csv = "study,nx,dt,error_xi,error_u,error\n";
  for (const auto* rows : {&rep.temporal, &rep.spatial}) {
    for (const auto& r : *rows) {
      csv += std::string(rows == &rep.temporal ? "temporal" : "spatial") + "," + std::to_string(r.nx) + "," +
             num(r.dt) + "," + num(r.error_xi) + "," + num(r.error_u) + "," + num(r.error) + "\n";
    }
  }
  write_file_atomic((output_dir(c) / "mms.csv").string(), csv);
  out << "mms status=ok temporal_ratio=" << num(rep.temporal_ratios.at(0))
      << " spatial_ratio=" << num(rep.spatial_ratio) << "\n";
  return kOk;
}

int cmd_info(const std::vector<std::string>& args, std::ostream& out, std::ostream&) {
  if (args.size() != 2) throw UsageError("info takes exactly one path");
  const std::string bytes = read_file(args[1]);
  if (bytes.rfind("CPE1", 0) == 0) {
    const Snapshot s = decode_snapshot(bytes);
    const DomainSpec& g = s.state.xi.basis->spec();
    out << "snapshot version=" << kSnapshotVersion << " nx1=" << g.nx1 << " nx2=" << g.nx2
        << " nz=" << g.nz << " h=" << num(g.h) << " t=" << num(s.state.t) << "\n";
    for (std::size_t i = 0; i < kParamNames.size(); ++i) {
      out << "params." << kParamNames[i] << " = " << num(param_value(s.params, i)) << "\n";
    }
    out << "info status=ok kind=snapshot min_xi=" << num(s.state.xi.min())
        << " max_xi=" << num(s.state.xi.max()) << "\n";
    return kOk;
  }
  const auto records = parse_diagnostics(bytes);
  out << "info status=ok kind=diagnostics rows=" << records.size()
      << " columns=" << diagnostics_columns().size();
  if (!records.empty()) out << " t0=" << num(records.front().t) << " t1=" << num(records.back().t);
  out << "\n";
  return kOk;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    if (args.empty()) throw UsageError("missing subcommand");
    const std::string& cmd = args[0];
    if (cmd == "run") return cmd_run(args, out, err);
    if (cmd == "check") return cmd_check(args, out, err);
    if (cmd == "continuation") return cmd_continuation(args, out, err);
    if (cmd == "mms") return cmd_mms(args, out, err);
    if (cmd == "info") return cmd_info(args, out, err);
    throw UsageError("unknown subcommand '" + cmd + "'");
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n" << usage;
    out << "status=invalid\n";
    return kInvalid;
  } catch (const std::exception& e) {
    err << kind(e) << ": " << e.what() << "\n";
    const bool solver = is_solver_error(e);
    out << "status=" << (solver ? "solver_error" : "invalid") << "\n";
    return solver ? kSolver : kInvalid;
  }
}

}  // namespace cpe
