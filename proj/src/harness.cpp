#include "cpe/harness.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numbers>
#include <random>

#include "cpe/errors.hpp"

namespace cpe {

namespace {

using std::numbers::pi;

int band(int n) { return (n - 1) / 3; }

Field2D random_field2d(const BasisPtr& B, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Spectrum2D s{B, std::vector<cplx>(B->nc2d(), 0.0)};
  const int K1 = band(B->nx1()), K2 = band(B->nx2());
  for (int j = 0; j < B->nx2(); ++j) {
    const int k2 = B->wavenumber2(j);
    if (std::abs(k2) > K2) continue;
    for (int k1 = 0; k1 <= K1; ++k1) {
      if (k1 == 0 && k2 == 0) continue;
      const double decay = 1.0 / (1.0 + k1 * k1 + k2 * k2);
      s.at(k1, j) = decay * cplx(nd(rng), nd(rng));
    }
  }
  return project(from_spectral(s));
}

Field3D random_field3d(const BasisPtr& B, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Spectrum3D s{B, Parity::Even, std::vector<cplx>(B->nc3d(), 0.0)};
  const int K1 = band(B->nx1()), K2 = band(B->nx2());
  const int mmax = (2 * B->top_mode() - 1) / 3;
  for (int m = 0; m <= mmax; ++m) {
    for (int j = 0; j < B->nx2(); ++j) {
      const int k2 = B->wavenumber2(j);
      if (std::abs(k2) > K2) continue;
      for (int k1 = 0; k1 <= K1; ++k1) {
        const double decay = 1.0 / (1.0 + k1 * k1 + k2 * k2 + m * m);
        s.at(k1, j, m) = decay * cplx(nd(rng), nd(rng));
      }
    }
  }
  return project(from_spectral(to_spectral(from_spectral(s))));
}

// Rescales f to have max |f| = 1 (zero fields are returned unchanged).
template <class F>
F normalized(F f) {
  const double m = f.max_abs();
  if (m > 0.0) f *= 1.0 / m;
  return f;
}

Field2D sqrt_field(const Field2D& xi) {
  return map(xi, [](double v) { return std::sqrt(v); });
}

double grad_norm2(const Field2D& f) {
  const VField2D g = grad_x(f);
  return integrate(g.c1 * g.c1 + g.c2 * g.c2);
}

// Instantaneous values of the vanishing monitors (before time integration).
std::vector<double> monitor_rates(const ReducedState& s, const Params& p) {
  const Basis& B = *s.xi.basis;
  const double h = B.h();
  const Field2D& xi = s.xi;
  const VField3D& u = s.u;
  const double cold = h * integrate(map(xi, [](double v) { return std::pow(v, -10.0); }));
  const Field3D lu1 = diff(u.c1, DiffOp::laplace);
  const Field3D lu2 = diff(u.c2, DiffOp::laplace);
  const double lap_u = integrate(lu1 * lu1 + lu2 * lu2);
  const double grad_sqrt = h * grad_norm2(sqrt_field(xi));
  const double u2 = integrate(u.c1 * u.c1 + u.c2 * u.c2);
  const Field2D lap2 = diff(diff(xi, DiffOp::laplace_x), DiffOp::laplace_x);
  const double hi = h * grad_norm2(lap2);
  return {p.eta * cold,         p.mu * lap_u,         p.eps * grad_sqrt,
          p.r0 * u2,            p.kappa * grad_sqrt,  p.delta * hi};
}

long step_count(double dt, double t_end) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("time.dt", "must be positive");
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw ValidationError("time.t_end", "must be nonnegative");
  const double n = std::round(t_end / dt);
  if (std::abs(n * dt - t_end) > 1e-9 * std::max(t_end, dt)) {
    throw ValidationError("time.t_end", "must be an integer multiple of dt");
  }
  return static_cast<long>(n);
}

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {"constant", "density_relax", "shear", "column",
                                                 "random"};
  return names;
}

void InitialData::validate(const Params& params) const {
  if (!(floor > 0.0)) throw ValidationError("init.floor", "must be positive");
  const double mn = state.xi.min();
  if (!(mn >= floor)) {
    throw ValidationError("init.xi", "minimum " + std::to_string(mn) + " is below the floor " +
                                         std::to_string(floor));
  }
  if (!std::isfinite(energy(state, params))) throw ValidationError("init", "initial energy is not finite");
  if (!std::isfinite(bd_entropy(state, params))) {
    throw ValidationError("init", "initial BD entropy is not finite");
  }
}

InitialData make_preset(const std::string& name, const BasisPtr& B, double amplitude, double floor,
                        std::uint64_t seed) {
  InitialData d;
  d.preset = name;
  d.floor = floor;
  d.seed = seed;
  d.amplitude = amplitude < 0.0 ? 0.1 : amplitude;
  const double A = d.amplitude;
  const double h = B->h();
  d.state.t = 0.0;
  d.state.u = zero_vfield(B);
  if (name == "constant") {
    d.state.xi = Field2D::constant(B, 1.0);
  } else if (name == "density_relax") {
    d.state.xi = Field2D::from_function(B, [A](double x, double) { return 1.0 + A * std::cos(x); });
  } else if (name == "shear") {
    // Band-limited square wave in x2: (4/pi) sum over odd k of sin(k x2) / k.
    const int K = band(B->nx2());
    d.state.xi = Field2D::constant(B, 1.0);
    d.state.u.c1 = Field3D::from_function(B, Parity::Even, [A, K](double, double y, double) {
      double s = 0.0;
      for (int k = 1; k <= K; k += 2) s += std::sin(k * y) / k;
      return A * 4.0 / pi * s;
    });
  } else if (name == "column") {
    d.state.xi = Field2D::from_function(B, [A](double x, double y) { return 1.0 + 0.5 * A * std::sin(x + y); });
    d.state.u.c1 = Field3D::from_function(B, Parity::Even, [A, h](double x, double y, double z) {
      return A * (std::cos(pi * z / h) * std::sin(x) + 0.5 * std::cos(y));
    });
    d.state.u.c2 = Field3D::from_function(B, Parity::Even, [A, h](double, double y, double z) {
      return A * std::cos(2.0 * pi * z / h) * std::cos(y);
    });
  } else if (name == "random") {
    std::mt19937_64 rng(seed);
    d.state.xi = Field2D::constant(B, 1.0) + A * normalized(random_field2d(B, rng));
    d.state.u.c1 = A * normalized(random_field3d(B, rng));
    d.state.u.c2 = A * normalized(random_field3d(B, rng));
  } else {
    throw ValidationError("init.preset", "unknown preset '" + name + "'");
  }
  d.state.xi = project(d.state.xi);
  d.state.u = project(d.state.u);
  if (!(d.state.xi.min() >= floor)) {
    throw ValidationError("init.amplitude", "preset density falls below the floor");
  }
  return d;
}

InitialData from_state(ReducedState state, double floor) {
  InitialData d;
  d.preset = "state";
  d.floor = floor;
  d.amplitude = 0.0;
  d.state = std::move(state);
  return d;
}

void RunResult::rethrow() const {
  if (error) std::rethrow_exception(error);
}

RunResult run_simulation(const InitialData& init, const Params& params, const RunOptions& opt) {
  params.validate();
  init.validate(params);
  if (opt.record_stride < 1) throw ValidationError("time.record_stride", "must be >= 1");
  RunResult res;
  res.steps_planned = step_count(opt.dt, opt.t_end);
  res.bounds = DensityBounds::from_initial(init.state.xi);
  ReducedState s = init.state;
  res.records.push_back(diagnose(s, params, res.bounds, opt.with_identities));
  for (long n = 0; n < res.steps_planned; ++n) {
    try {
      StepReport rep = galerkin_step_report(s, params, opt.dt, opt.step);
      s = std::move(rep.state);
    } catch (const std::exception& e) {
      res.failed_step = n;
      res.error_message = StepError(n, e.what()).what();
      res.error = std::current_exception();
      break;
    }
    // Keep t free of accumulated rounding.
    s.t = init.state.t + static_cast<double>(n + 1) * opt.dt;
    res.bounds = update_bounds(res.bounds, vertical_average(s.u), opt.dt);
    res.steps_completed = n + 1;
    if (opt.observer) opt.observer(s, n + 1);
    if ((n + 1) % opt.record_stride == 0 || n + 1 == res.steps_planned) {
      res.records.push_back(diagnose(s, params, res.bounds, opt.with_identities));
    }
  }
  res.final_state = std::move(s);
  return res;
}

double step_balance_residual(const ReducedState& s0, const Params& params, double dt,
                             const StepOptions& options) {
  const ReducedState s1 = galerkin_step_report(s0, params, dt, options).state;
  return energy(s1, params) + dt * total(dissipation(s1, params)) - energy(s0, params);
}

std::string_view stage_name(Stage s) {
  switch (s) {
    case Stage::eps_mu: return "eps_mu";
    case Stage::eta: return "eta";
    case Stage::kappa_delta_r0: return "kappa_delta_r0";
  }
  return "";
}

Stage parse_stage(std::string_view name) {
  for (Stage s : {Stage::eps_mu, Stage::eta, Stage::kappa_delta_r0}) {
    if (stage_name(s) == name) return s;
  }
  throw ValidationError("stage", "unknown stage '" + std::string(name) +
                                     "' (expected eps_mu, eta or kappa_delta_r0)");
}

void ContinuationSchedule::validate() const {
  if (rungs < 3) throw ValidationError("continuation.rungs", "must be >= 3");
  if (!(factor > 1.0)) throw ValidationError("continuation.factor", "must be > 1");
  if (!(horizon > 0.0)) throw ValidationError("continuation.horizon", "must be positive");
  base_params.validate();
  step_count(dt, horizon);
}

Params rung_params(const ContinuationSchedule& sc, int rung) {
  Params p = sc.base_params;
  const double s = std::pow(sc.factor, -rung);
  switch (sc.stage) {
    case Stage::eps_mu:
      p.eps *= s;
      p.mu *= s;
      break;
    case Stage::eta:
      p.eta *= s;
      break;
    case Stage::kappa_delta_r0:
      p.kappa *= s;
      p.delta *= s;
      p.r0 *= s;
      break;
  }
  return p;
}

const std::vector<std::string>& monitor_names() {
  static const std::vector<std::string> names = {
      "eta_int_xi_m10", "mu_int_lap_u2",   "eps_int_grad_sqrt_xi2",
      "r0_int_u2",      "kappa_int_grad_sqrt_xi2", "delta_int_grad_lap2_xi2"};
  return names;
}

void require_stage_order(const std::vector<Stage>& stages) {
  for (std::size_t i = 1; i < stages.size(); ++i) {
    if (static_cast<int>(stages[i]) <= static_cast<int>(stages[i - 1])) {
      throw ValidationError("continuation.stage",
                            "stages must follow the order eps_mu, eta, kappa_delta_r0");
    }
  }
}

ContinuationTable continuation_study(const ContinuationSchedule& sc, const InitialData& init) {
  sc.validate();
  auto run_rung = [&sc, &init](int p) {
    RungResult row;
    row.rung = p;
    row.params = rung_params(sc, p);
    std::vector<double> acc(monitor_names().size(), 0.0);
    RunOptions opt;
    opt.dt = sc.dt;
    opt.t_end = sc.horizon;
    opt.record_stride = std::numeric_limits<int>::max();
    opt.step = sc.step;
    opt.observer = [&](const ReducedState& s, long) {
      const auto rates = monitor_rates(s, row.params);
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += sc.dt * rates[i];
    };
    try {
      RunResult r = run_simulation(init, row.params, opt);
      row.ok = r.ok();
      row.error = r.error_message;
      row.final_state = std::move(r.final_state);
    } catch (const std::exception& e) {
      row.ok = false;
      row.error = e.what();
      row.final_state = init.state;
    }
    for (std::size_t i = 0; i < acc.size(); ++i) row.monitors.push_back({monitor_names()[i], acc[i]});
    return row;
  };

  ContinuationTable table;
  table.stage = sc.stage;
  if (sc.parallel) {
    std::vector<std::future<RungResult>> jobs;
    for (int p = 0; p < sc.rungs; ++p) jobs.push_back(std::async(std::launch::async, run_rung, p));
    for (auto& j : jobs) table.rows.push_back(j.get());
  } else {
    for (int p = 0; p < sc.rungs; ++p) table.rows.push_back(run_rung(p));
  }

  for (std::size_t p = 1; p < table.rows.size(); ++p) {
    RungResult& cur = table.rows[p];
    const RungResult& prev = table.rows[p - 1];
    if (!cur.ok || !prev.ok) continue;
    cur.diff_xi = l2_norm(cur.final_state.xi - prev.final_state.xi);
    const Field2D sa = sqrt_field(cur.final_state.xi), sb = sqrt_field(prev.final_state.xi);
    const VField3D ma{sa * cur.final_state.u.c1, sa * cur.final_state.u.c2};
    const VField3D mb{sb * prev.final_state.u.c1, sb * prev.final_state.u.c2};
    cur.diff_momentum = l2_norm(ma - mb);
  }
  return table;
}

Field2D ManufacturedTarget::xi(const BasisPtr& B, double t) const {
  const double amp = b * std::exp(-t);
  return Field2D::from_function(B, [this, amp](double x, double) { return a + amp * std::cos(x); });
}

VField3D ManufacturedTarget::u(const BasisPtr& B, double t) const {
  const double amp = c * std::exp(-t);
  const double h = B->h();
  return {Field3D::from_function(B, Parity::Even,
                                 [amp, h](double x, double, double z) {
                                   return amp * std::sin(x) * std::cos(pi * z / h);
                                 }),
          Field3D(B, Parity::Even)};
}

namespace {

Field2D restrict_to(const Field2D& f, const BasisPtr& B) {
  return from_spectral(resample(to_spectral(f), B));
}

VField3D restrict_to(const VField3D& f, const BasisPtr& B) {
  return {from_spectral(resample(to_spectral(f.c1), B)), from_spectral(resample(to_spectral(f.c2), B))};
}

struct Errors {
  double xi = 0.0;
  double u = 0.0;
};

Errors target_error(const ReducedState& s, const ManufacturedTarget& tg) {
  const BasisPtr& B = s.xi.basis;
  return {l2_norm(s.xi - tg.xi(B, s.t)), l2_norm(s.u - tg.u(B, s.t))};
}

// Sources that make the target an exact solution of the time-continuous
// semi-discrete equations on grid B at time t.
void continuous_sources(const ManufacturedTarget& tg, const BasisPtr& B, const Params& p, double t,
                        Field2D& s_xi, VField3D& s_u) {
  const Field2D xi = tg.xi(B, t);
  const VField3D u = tg.u(B, t);
  const Field2D dxi = xi - Field2D::constant(B, tg.a);  // d/dt of b e^{-t} cos x1 is its negative
  s_xi = -1.0 * dxi - continuity_rhs(xi, vertical_average(u), p.eps);
  // d/dt (xi u) = -dxi u - xi u.
  const VField3D dm = -1.0 * VField3D{dxi * u.c1 + xi * u.c1, dxi * u.c2 + xi * u.c2};
  s_u = dm - step_forces(xi, xi, u, p).total();
}

// Sources that make the target an exact fixed point of one discrete step
// t0 -> t0 + dt, evaluated on the fine grid F and truncated to B.
void step_sources(const ManufacturedTarget& tg, const BasisPtr& F, const BasisPtr& B,
                  const Params& p, double t0, double dt, Field2D& s_xi, VField3D& s_u) {
  const Field2D xi0 = tg.xi(F, t0), xi1 = tg.xi(F, t0 + dt);
  const VField3D u0 = tg.u(F, t0), u1 = tg.u(F, t0 + dt);
  const VField2D ubar = vertical_average(u1);
  Field2D sx = (1.0 / dt) * (xi1 - xi0) - p.eps * diff(xi1, DiffOp::laplace_x) +
               div_x(VField2D{project(xi0 * ubar.c1), project(xi0 * ubar.c2)});
  const VField3D m0 = project(VField3D{xi0 * u0.c1, xi0 * u0.c2});
  const VField3D m1 = project(VField3D{xi1 * u1.c1, xi1 * u1.c2});
  VField3D su = (1.0 / dt) * (m1 - m0) - step_forces(xi0, xi1, u1, p).total();
  s_xi = restrict_to(sx, B);
  s_u = restrict_to(su, B);
}

}  // namespace

MmsReport manufactured_solution_test(const DomainSpec& spec, const Params& params,
                                     const MmsOptions& opt) {
  params.validate();
  const ManufacturedTarget& tg = opt.target;
  if (!(tg.a > tg.b && tg.b >= 0.0)) throw ValidationError("mms.target", "need a > b >= 0");
  if (opt.oversample < 1) throw ValidationError("mms.oversample", "must be >= 1");
  MmsReport rep;

  auto finish = [&](const ReducedState& s, int nx, double dt) {
    const Errors e = target_error(s, tg);
    return MmsRow{nx, dt, e.xi, e.u, e.xi + e.u};
  };

  const BasisPtr B = make_basis(spec);
  for (double dt : opt.dt_list) {
    const long steps = step_count(dt, opt.t_end);
    ReducedState s{0.0, tg.xi(B, 0.0), tg.u(B, 0.0)};
    Field2D s_xi;
    VField3D s_u;
    StepOptions so = opt.step;
    so.sources = {&s_xi, &s_u};
    for (long n = 0; n < steps; ++n) {
      const double t1 = static_cast<double>(n + 1) * dt;
      continuous_sources(tg, B, params, t1, s_xi, s_u);
      s = galerkin_step_report(s, params, dt, so).state;
      s.t = t1;
    }
    rep.temporal.push_back(finish(s, spec.nx1, dt));
  }
  for (std::size_t i = 0; i + 1 < rep.temporal.size(); ++i) {
    rep.temporal_ratios.push_back(rep.temporal[i].error / rep.temporal[i + 1].error);
  }

  const long steps = step_count(opt.spatial_dt, opt.spatial_t_end);
  for (int nx : opt.resolutions) {
    DomainSpec sp = spec;
    sp.nx1 = sp.nx2 = nx;
    DomainSpec fine = sp;
    fine.nx1 = fine.nx2 = nx * opt.oversample;
    const BasisPtr Bc = make_basis(sp);
    const BasisPtr Bf = make_basis(fine);
    ReducedState s{0.0, tg.xi(Bc, 0.0), tg.u(Bc, 0.0)};
    Field2D s_xi;
    VField3D s_u;
    StepOptions so = opt.step;
    so.sources = {&s_xi, &s_u};
    for (long n = 0; n < steps; ++n) {
      const double t0 = static_cast<double>(n) * opt.spatial_dt;
      step_sources(tg, Bf, Bc, params, t0, opt.spatial_dt, s_xi, s_u);
      s = galerkin_step_report(s, params, opt.spatial_dt, so).state;
      s.t = t0 + opt.spatial_dt;
    }
    rep.spatial.push_back(finish(s, nx, opt.spatial_dt));
  }
  if (rep.spatial.size() >= 2) {
    rep.spatial_ratio = rep.spatial.front().error / rep.spatial.back().error;
  }
  return rep;
}

}  // namespace cpe
