#include "cpe/io.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "cpe/errors.hpp"

namespace cpe {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool parse_double(const std::string& s, double& v) {
  if (s.empty()) return false;
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  return ec == std::errc() && p == end;
}

template <class Int>
bool parse_int(const std::string& s, Int& v) {
  if (s.empty()) return false;
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  return ec == std::errc() && p == end;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep)) out.push_back(trim(item));
  return out;
}

std::string join(const std::vector<std::string>& v, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? sep : "") + v[i];
  return out;
}

struct Key {
  std::string name;
  // Parses text into the config; returns false on a malformed value.
  std::function<bool(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

Key real(std::string name, double RunConfig::*m) {
  return {std::move(name), [m](RunConfig& c, const std::string& s) { return parse_double(s, c.*m); },
          [m](const RunConfig& c) { return fmt(c.*m); }};
}

Key integer(std::string name, int RunConfig::*m) {
  return {std::move(name), [m](RunConfig& c, const std::string& s) { return parse_int(s, c.*m); },
          [m](const RunConfig& c) { return std::to_string(c.*m); }};
}

Key text(std::string name, std::string RunConfig::*m) {
  return {std::move(name),
          [m](RunConfig& c, const std::string& s) {
            c.*m = s;
            return true;
          },
          [m](const RunConfig& c) { return c.*m; }};
}

const std::vector<Key>& keys() {
  static const std::vector<Key> table = [] {
    std::vector<Key> k;
    k.push_back({"grid.nx1", [](RunConfig& c, const std::string& s) { return parse_int(s, c.grid.nx1); },
                 [](const RunConfig& c) { return std::to_string(c.grid.nx1); }});
    k.push_back({"grid.nx2", [](RunConfig& c, const std::string& s) { return parse_int(s, c.grid.nx2); },
                 [](const RunConfig& c) { return std::to_string(c.grid.nx2); }});
    k.push_back({"grid.nz", [](RunConfig& c, const std::string& s) { return parse_int(s, c.grid.nz); },
                 [](const RunConfig& c) { return std::to_string(c.grid.nz); }});
    k.push_back({"grid.h", [](RunConfig& c, const std::string& s) { return parse_double(s, c.grid.h); },
                 [](const RunConfig& c) { return fmt(c.grid.h); }});
    for (std::size_t i = 0; i < kParamNames.size(); ++i) {
      k.push_back({"params." + std::string(kParamNames[i]),
                   [i](RunConfig& c, const std::string& s) { return parse_double(s, param_ref(c.params, i)); },
                   [i](const RunConfig& c) { return fmt(param_value(c.params, i)); }});
    }
    k.push_back(real("time.dt", &RunConfig::dt));
    k.push_back(real("time.t_end", &RunConfig::t_end));
    k.push_back(integer("time.record_stride", &RunConfig::record_stride));
    k.push_back({"time.identities",
                 [](RunConfig& c, const std::string& s) {
                   if (s != "true" && s != "false") return false;
                   c.identities = s == "true";
                   return true;
                 },
                 [](const RunConfig& c) { return std::string(c.identities ? "true" : "false"); }});
    k.push_back(text("init.preset", &RunConfig::init_preset));
    k.push_back(real("init.amplitude", &RunConfig::init_amplitude));
    k.push_back(real("init.floor", &RunConfig::init_floor));
    k.push_back(text("init.snapshot", &RunConfig::init_snapshot));
    k.push_back(text("output.directory", &RunConfig::output_directory));
    k.push_back({"output.formats",
                 [](RunConfig& c, const std::string& s) {
                   c.output_formats = split(s, ',');
                   return true;
                 },
                 [](const RunConfig& c) { return join(c.output_formats, ","); }});
    k.push_back({"run.seed", [](RunConfig& c, const std::string& s) { return parse_int(s, c.seed); },
                 [](const RunConfig& c) { return std::to_string(c.seed); }});
    k.push_back(text("continuation.stage", &RunConfig::continuation_stage));
    k.push_back(integer("continuation.rungs", &RunConfig::continuation_rungs));
    k.push_back(real("continuation.factor", &RunConfig::continuation_factor));
    k.push_back(real("continuation.horizon", &RunConfig::continuation_horizon));
    k.push_back(real("mms.dt", &RunConfig::mms_dt));
    k.push_back(real("mms.t_end", &RunConfig::mms_t_end));
    k.push_back(real("mms.spatial_dt", &RunConfig::mms_spatial_dt));
    k.push_back(real("mms.spatial_t_end", &RunConfig::mms_spatial_t_end));
    k.push_back(integer("mms.oversample", &RunConfig::mms_oversample));
    return k;
  }();
  return table;
}

bool is_multiple(double t, double dt) {
  const double n = std::round(t / dt);
  return std::abs(n * dt - t) <= 1e-9 * std::max(t, dt);
}

}  // namespace

void RunConfig::validate() const {
  try {
    grid.validate();
  } catch (const InvalidSpec& e) {
    throw ValidationError("grid", e.what());
  }
  params.validate();
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("time.dt", "must be positive");
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw ValidationError("time.t_end", "must be nonnegative");
  if (!is_multiple(t_end, dt)) throw ValidationError("time.t_end", "must be an integer multiple of time.dt");
  if (record_stride < 1) throw ValidationError("time.record_stride", "must be >= 1");
  if (init_snapshot.empty()) {
    const auto& names = preset_names();
    if (std::find(names.begin(), names.end(), init_preset) == names.end()) {
      throw ValidationError("init.preset", "unknown preset '" + init_preset + "'");
    }
  } else if (!std::filesystem::is_regular_file(init_snapshot)) {
    throw ValidationError("init.snapshot", "file '" + init_snapshot + "' does not exist");
  }
  if (!(init_floor > 0.0)) throw ValidationError("init.floor", "must be positive");
  if (!std::isfinite(init_amplitude)) throw ValidationError("init.amplitude", "must be finite");
  if (output_directory.empty()) throw ValidationError("output.directory", "must not be empty");
  std::set<std::string> seen;
  for (const auto& f : output_formats) {
    if (f != "csv" && f != "snapshot") throw ValidationError("output.formats", "unknown format '" + f + "'");
    if (!seen.insert(f).second) throw ValidationError("output.formats", "repeated format '" + f + "'");
  }
  parse_stage(continuation_stage);
  if (continuation_rungs < 3) throw ValidationError("continuation.rungs", "must be >= 3");
  if (!(continuation_factor > 1.0)) throw ValidationError("continuation.factor", "must be > 1");
  if (!(continuation_horizon > 0.0)) throw ValidationError("continuation.horizon", "must be positive");
  if (!is_multiple(continuation_horizon, dt)) {
    throw ValidationError("continuation.horizon", "must be an integer multiple of time.dt");
  }
  for (auto [key, v] : {std::pair{"mms.dt", mms_dt}, std::pair{"mms.t_end", mms_t_end},
                        std::pair{"mms.spatial_dt", mms_spatial_dt},
                        std::pair{"mms.spatial_t_end", mms_spatial_t_end}}) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError(key, "must be positive");
  }
  if (!is_multiple(mms_t_end, mms_dt / 2)) throw ValidationError("mms.t_end", "must be a multiple of mms.dt / 2");
  if (!is_multiple(mms_spatial_t_end, mms_spatial_dt)) {
    throw ValidationError("mms.spatial_t_end", "must be a multiple of mms.spatial_dt");
  }
  if (mms_oversample < 1) throw ValidationError("mms.oversample", "must be >= 1");
}

RunConfig parse_config(std::string_view text) {
  RunConfig c;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  std::istringstream is{std::string(text)};
  std::string line;
  while (std::getline(is, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ParseError(line_no, "expected 'key = value'");
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    const auto& table = keys();
    const auto it = std::find_if(table.begin(), table.end(), [&](const Key& k) { return k.name == key; });
    if (it == table.end()) throw ParseError(line_no, "unknown key '" + key + "'");
    if (!seen.insert(key).second) throw ParseError(line_no, "repeated key '" + key + "'");
    if (!it->set(c, value)) throw ParseError(line_no, "invalid value '" + value + "' for " + key);
  }
  if (!seen.count("grid.nx2")) c.grid.nx2 = c.grid.nx1;
  c.validate();
  return c;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IOError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  if (f.bad()) throw IOError("error reading '" + path + "'");
  return ss.str();
}

void write_file_atomic(const std::string& path, std::string_view data) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IOError("cannot open '" + tmp + "' for writing");
    f.write(data.data(), static_cast<std::streamsize>(data.size()));
    f.flush();
    if (!f) throw IOError("error writing '" + tmp + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IOError("cannot move '" + tmp + "' to '" + path + "'");
  }
}

RunConfig load_config(const std::string& path) { return parse_config(read_file(path)); }

std::string serialize_config(const RunConfig& c) {
  std::string out;
  for (const auto& k : keys()) out += k.name + " = " + k.get(c) + "\n";
  return out;
}

std::vector<std::string> diagnostics_columns() {
  std::vector<std::string> cols = {"t",      "mass",   "energy",      "bd_entropy",
                                   "min_xi", "max_xi", "bound_lower", "bound_upper"};
  for (const auto* list : {&dissipation_names(), &bd_dissipation_names(), &identity_residual_names()}) {
    cols.insert(cols.end(), list->begin(), list->end());
  }
  return cols;
}

std::string format_diagnostics(const std::vector<DiagnosticsRecord>& records) {
  std::string out = join(diagnostics_columns(), ",") + "\n";
  const std::size_t nid = identity_residual_names().size();
  for (const auto& r : records) {
    std::vector<std::string> cells;
    for (double v : {r.t, r.mass, r.energy, r.bd_entropy, r.min_xi, r.max_xi, r.bound_lower, r.bound_upper}) {
      cells.push_back(fmt(v));
    }
    for (const auto* list : {&r.dissipation, &r.bd_dissipation}) {
      for (const auto& n : *list) cells.push_back(fmt(n.value));
    }
    if (r.identity_residuals.empty()) {
      cells.insert(cells.end(), nid, "");
    } else {
      for (const auto& n : r.identity_residuals) cells.push_back(fmt(n.value));
    }
    out += join(cells, ",") + "\n";
  }
  return out;
}

std::vector<DiagnosticsRecord> parse_diagnostics(std::string_view text) {
  std::istringstream is{std::string(text)};
  std::string line;
  if (!std::getline(is, line)) throw SchemaError("missing header row");
  const auto cols = diagnostics_columns();
  if (split(line, ',') != cols) throw SchemaError("unexpected column set: " + trim(line));
  const std::size_t nd = dissipation_names().size(), nb = bd_dissipation_names().size();
  std::vector<DiagnosticsRecord> out;
  std::size_t row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (trim(line).empty()) continue;
    // split() drops a trailing empty cell, so count commas instead.
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (;;) {
      const auto comma = line.find(',', start);
      cells.push_back(trim(line.substr(start, comma - start)));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (cells.size() != cols.size()) {
      throw SchemaError("row " + std::to_string(row) + " has " + std::to_string(cells.size()) + " cells");
    }
    auto num = [&](std::size_t i) {
      double v;
      if (!parse_double(cells[i], v)) {
        throw SchemaError("row " + std::to_string(row) + ": bad value '" + cells[i] + "' in " + cols[i]);
      }
      return v;
    };
    DiagnosticsRecord r;
    double* head[] = {&r.t, &r.mass, &r.energy, &r.bd_entropy, &r.min_xi, &r.max_xi, &r.bound_lower, &r.bound_upper};
    for (std::size_t i = 0; i < 8; ++i) *head[i] = num(i);
    for (std::size_t i = 0; i < nd; ++i) r.dissipation.push_back({cols[8 + i], num(8 + i)});
    for (std::size_t i = 0; i < nb; ++i) r.bd_dissipation.push_back({cols[8 + nd + i], num(8 + nd + i)});
    const std::size_t id0 = 8 + nd + nb;
    const bool blank = std::all_of(cells.begin() + static_cast<std::ptrdiff_t>(id0), cells.end(),
                                   [](const std::string& s) { return s.empty(); });
    if (!blank) {
      for (std::size_t i = id0; i < cols.size(); ++i) r.identity_residuals.push_back({cols[i], num(i)});
    }
    out.push_back(std::move(r));
  }
  return out;
}

void write_diagnostics(const std::vector<DiagnosticsRecord>& records, const std::string& path) {
  write_file_atomic(path, format_diagnostics(records));
}

std::vector<DiagnosticsRecord> read_diagnostics(const std::string& path) {
  return parse_diagnostics(read_file(path));
}

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f64(std::string& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

class Reader {
 public:
  explicit Reader(std::string_view d) : d_(d) {}
  std::uint64_t raw(int n) {
    if (pos_ + static_cast<std::size_t>(n) > d_.size()) throw IOError("snapshot is truncated");
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(d_[pos_ + i])) << (8 * i);
    }
    pos_ += static_cast<std::size_t>(n);
    return v;
  }
  std::uint32_t u32() { return static_cast<std::uint32_t>(raw(4)); }
  double f64() { return std::bit_cast<double>(raw(8)); }
  std::size_t pos() const { return pos_; }

 private:
  std::string_view d_;
  std::size_t pos_ = 0;
};

std::uint32_t crc(std::string_view bytes) {
  uLong c = crc32(0L, Z_NULL, 0);
  c = crc32(c, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size()));
  return static_cast<std::uint32_t>(c);
}

constexpr std::size_t kHeaderBytes = 4 + 4 + 3 * 4 + 2 * 8 + kParamNames.size() * 8;

}  // namespace

std::string encode_snapshot(const ReducedState& s, const Params& params) {
  const Basis& B = *s.xi.basis;
  std::string out = "CPE1";
  put_u32(out, kSnapshotVersion);
  put_u32(out, static_cast<std::uint32_t>(B.nx1()));
  put_u32(out, static_cast<std::uint32_t>(B.nx2()));
  put_u32(out, static_cast<std::uint32_t>(B.nz()));
  put_f64(out, B.h());
  put_f64(out, s.t);
  for (std::size_t i = 0; i < kParamNames.size(); ++i) put_f64(out, param_value(params, i));
  const std::size_t payload = out.size();
  for (double v : s.xi.values) put_f64(out, v);
  for (double v : s.u.c1.values) put_f64(out, v);
  for (double v : s.u.c2.values) put_f64(out, v);
  put_u32(out, crc(std::string_view(out).substr(payload)));
  return out;
}

Snapshot decode_snapshot(std::string_view bytes) {
  if (bytes.size() < 4 || bytes.substr(0, 4) != "CPE1") throw BadMagic("not a CPE1 snapshot");
  Reader r(bytes.substr(4));
  const std::uint32_t version = r.u32();
  if (version != kSnapshotVersion) {
    throw VersionUnsupported("snapshot version " + std::to_string(version) + " is not supported");
  }
  DomainSpec spec;
  spec.nx1 = static_cast<int>(r.u32());
  spec.nx2 = static_cast<int>(r.u32());
  spec.nz = static_cast<int>(r.u32());
  spec.h = r.f64();
  const double t = r.f64();
  Snapshot snap;
  for (std::size_t i = 0; i < kParamNames.size(); ++i) param_ref(snap.params, i) = r.f64();
  const std::size_t n2 = spec.n2d(), n3 = spec.n3d();
  const std::size_t payload_bytes = 8 * (n2 + 2 * n3);
  if (bytes.size() != kHeaderBytes + payload_bytes + 4) {
    throw IOError("snapshot size " + std::to_string(bytes.size()) + " does not match its header");
  }
  const std::string_view payload = bytes.substr(kHeaderBytes, payload_bytes);
  Reader tail(bytes.substr(kHeaderBytes + payload_bytes));
  if (crc(payload) != tail.u32()) throw ChecksumMismatch("snapshot payload checksum mismatch");

  BasisPtr B;
  try {
    B = make_basis(spec);
  } catch (const InvalidSpec& e) {
    throw IOError(std::string("snapshot header: ") + e.what());
  }
  Reader p(payload);
  snap.state.t = t;
  snap.state.xi = Field2D(B);
  snap.state.u = zero_vfield(B);
  for (double& v : snap.state.xi.values) v = p.f64();
  for (double& v : snap.state.u.c1.values) v = p.f64();
  for (double& v : snap.state.u.c2.values) v = p.f64();
  return snap;
}

void write_snapshot(const ReducedState& state, const Params& params, const std::string& path) {
  write_file_atomic(path, encode_snapshot(state, params));
}

Snapshot read_snapshot(const std::string& path) { return decode_snapshot(read_file(path)); }

}  // namespace cpe
