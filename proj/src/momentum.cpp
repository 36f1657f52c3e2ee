#include "cpe/momentum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "cpe/continuity.hpp"
#include "cpe/errors.hpp"

namespace cpe {

namespace {

void require_positive(const Field2D& xi, double floor) {
  const double mn = xi.min();
  if (!(mn > floor)) throw DensityNonPositive(mn, floor);
}

Field3D dz(const Field3D& f) { return diff(f, DiffOp::dz); }

VField3D broadcast(const VField2D& v) { return {cpe::broadcast(v.c1), cpe::broadcast(v.c2)}; }

VField2D scale(double s, VField2D v) {
  v.c1 *= s;
  v.c2 *= s;
  return v;
}

VField2D times(const Field2D& f, const VField2D& v) { return {f * v.c1, f * v.c2}; }

double mean(const Field2D& f) {
  return integrate(f) / (4.0 * std::numbers::pi * std::numbers::pi);
}

// |u| u pointwise.
VField3D abs_times(const VField3D& u) {
  VField3D out = u;
  for (std::size_t q = 0; q < u.c1.values.size(); ++q) {
    const double a = std::hypot(u.c1.values[q], u.c2.values[q]);
    out.c1.values[q] *= a;
    out.c2.values[q] *= a;
  }
  return out;
}

// 2 div_x(f D(u)) with f z-independent.
VField3D viscous_divergence(const Field2D& f, const Tensor2& D) {
  VField3D out;
  for (int i = 0; i < 2; ++i) {
    Field3D c = diff(f * D.a[i][0], DiffOp::dx1) + diff(f * D.a[i][1], DiffOp::dx2);
    c *= 2.0;
    (i == 0 ? out.c1 : out.c2) = std::move(c);
  }
  return out;
}

Field3D& comp(VField3D& v, int i) { return i == 0 ? v.c1 : v.c2; }
const Field3D& comp(const VField3D& v, int i) { return i == 0 ? v.c1 : v.c2; }

// Chemical-potential pieces mu(xi) whose gradient, weighted by -xi_old,
// gives the pressure-type forces.
Field2D bohm_potential(const Field2D& xi) {
  const Field2D root = map(xi, [](double v) { return std::sqrt(v); });
  const Field2D lap = diff(root, DiffOp::laplace_x);
  Field2D out = lap;
  for (std::size_t q = 0; q < out.values.size(); ++q) out.values[q] /= root.values[q];
  return out;
}

}  // namespace

void Params::validate() const {
  for (std::size_t i = 0; i < kParamNames.size(); ++i) {
    const double v = param_value(*this, i);
    const std::string key = "params." + std::string(kParamNames[i]);
    if (!std::isfinite(v)) throw ValidationError(key, "must be finite");
    if (v < 0.0) throw ValidationError(key, "must be nonnegative");
  }
  if (!(nu1 > 0.0)) throw ValidationError("params.nu1", "must be positive");
  if (!(nu2 > 0.0)) throw ValidationError("params.nu2", "must be positive");
  if (!(density_floor > 0.0)) throw ValidationError("params.density_floor", "must be positive");
}

double& param_ref(Params& p, std::size_t i) {
  double* fields[] = {&p.nu1, &p.nu2, &p.r,     &p.r0,    &p.eps,
                      &p.mu,  &p.eta, &p.kappa, &p.delta, &p.density_floor};
  return *fields[i];
}

double param_value(const Params& p, std::size_t i) { return param_ref(const_cast<Params&>(p), i); }

VField3D& ForceBreakdown::part(std::size_t i) {
  VField3D* parts[] = {&convection_x,         &convection_z,       &pressure,
                       &drag_r0,              &damping_r,          &hyperviscosity_mu,
                       &horizontal_viscosity, &vertical_viscosity, &eps_commutator,
                       &cold_pressure_eta,    &quantum_kappa,      &highorder_delta};
  return *parts[i];
}

const VField3D& ForceBreakdown::part(std::size_t i) const {
  return const_cast<ForceBreakdown*>(this)->part(i);
}

VField3D ForceBreakdown::total() const {
  VField3D sum = part(0);
  for (std::size_t i = 1; i < names.size(); ++i) sum += part(i);
  return sum;
}

Tensor2 grad_x(const VField3D& u) {
  Tensor2 g;
  for (int i = 0; i < 2; ++i) {
    g.a[i][0] = diff(comp(u, i), DiffOp::dx1);
    g.a[i][1] = diff(comp(u, i), DiffOp::dx2);
  }
  return g;
}

Strain strain(const VField3D& u) {
  const Tensor2 g = grad_x(u);
  Strain s;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      s.D.a[i][j] = 0.5 * (g.a[i][j] + g.a[j][i]);
      s.A.a[i][j] = 0.5 * (g.a[i][j] - g.a[j][i]);
    }
  }
  return s;
}

double weighted_norm2(const Field2D& f, const Tensor2& T) {
  double sum = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) sum += integrate(f * (T.a[i][j] * T.a[i][j]));
  return sum;
}

VField2D quantum_force(const Field2D& xi, double kappa, double floor) {
  require_positive(xi, floor);
  const Field2D L = map(xi, [](double v) { return std::log(v); });
  const Field2D Lx = diff(L, DiffOp::dx1);
  const Field2D Ly = diff(L, DiffOp::dx2);
  const Field2D h11 = diff(Lx, DiffOp::dx1);
  const Field2D h12 = diff(Lx, DiffOp::dx2);
  const Field2D h22 = diff(Ly, DiffOp::dx2);
  VField2D out{diff(xi * h11, DiffOp::dx1) + diff(xi * h12, DiffOp::dx2),
               diff(xi * h12, DiffOp::dx1) + diff(xi * h22, DiffOp::dx2)};
  return scale(0.5 * kappa, out);
}

VField2D quantum_force_direct(const Field2D& xi, double kappa, double floor) {
  require_positive(xi, floor);
  return scale(kappa, times(xi, grad_x(bohm_potential(xi))));
}

ForceBreakdown momentum_rhs(const ReducedState& state, const Params& p) {
  const Field2D& xi = state.xi;
  const VField3D& u = state.u;
  require_positive(xi, p.density_floor);
  const BasisPtr& B = xi.basis;
  ForceBreakdown f;

  // xi w = -div_x(xi int_0^z (u - ubar)), odd in z.
  const VField3D S = vertical_fluctuation_antiderivative(u);
  const Field3D xw = -1.0 * div_x(VField3D{xi * S.c1, xi * S.c2});
  const Tensor2 g = grad_x(u);
  const Strain st = strain(u);
  const VField2D gxi = grad_x(xi);
  f.convection_x = zero_vfield(B);
  f.convection_z = zero_vfield(B);
  f.eps_commutator = zero_vfield(B);
  for (int i = 0; i < 2; ++i) {
    const Field3D xu_i = xi * comp(u, i);
    comp(f.convection_x, i) =
        -1.0 * (diff(u.c1 * xu_i, DiffOp::dx1) + diff(u.c2 * xu_i, DiffOp::dx2));
    comp(f.convection_z, i) = -1.0 * dz(xw * comp(u, i));
    comp(f.eps_commutator, i) = -p.eps * (gxi.c1 * g.a[i][0] + gxi.c2 * g.a[i][1]);
  }
  f.pressure = broadcast(scale(-1.0, gxi));
  f.drag_r0 = -p.r0 * u;
  f.damping_r = -p.r * VField3D{xi * abs_times(u).c1, xi * abs_times(u).c2};
  f.hyperviscosity_mu = -p.mu * VField3D{diff(u.c1, DiffOp::bilaplace), diff(u.c2, DiffOp::bilaplace)};
  f.horizontal_viscosity = p.nu1 * viscous_divergence(xi, st.D);
  f.vertical_viscosity = p.nu2 * VField3D{xi * dz(dz(u.c1)), xi * dz(dz(u.c2))};
  const Field2D cold = map(xi, [](double v) { return std::pow(v, -10.0); });
  f.cold_pressure_eta = broadcast(scale(p.eta, grad_x(cold)));
  f.quantum_kappa = broadcast(quantum_force(xi, p.kappa, p.density_floor));
  f.highorder_delta = broadcast(scale(p.delta, times(xi, grad_x(diff(xi, DiffOp::laplace_x5)))));
  for (std::size_t i = 0; i < ForceBreakdown::names.size(); ++i) f.part(i) = project(f.part(i));
  return f;
}

VField3D convection_z_expanded(const Field2D& xi, const VField3D& u) {
  const Basis& B = *xi.basis;
  const CumulativeVelocity ut = vertical_cumulative(u);
  const VField2D ubar = vertical_average(u);
  const Tensor2 g = grad_x(u);
  const std::size_t plane = B.n2d();
  Field3D t1(xi.basis, Parity::Even, ut.c1), t2(xi.basis, Parity::Even, ut.c2);
  const Field3D zfield =
      Field3D::from_function(xi.basis, Parity::Even, [](double, double, double z) { return z; });
  VField3D out = zero_vfield(xi.basis);
  for (int i = 0; i < 2; ++i) {
    const Field3D& ui = comp(u, i);
    Field3D flux = diff(xi * (t1 * ui), DiffOp::dx1) + diff(xi * (t2 * ui), DiffOp::dx2);
    flux *= -1.0;
    flux += xi * (t1 * g.a[i][0] + t2 * g.a[i][1]);
    const Field3D mean_div = diff(xi * (broadcast(ubar.c1) * ui), DiffOp::dx1) +
                             diff(xi * (broadcast(ubar.c2) * ui), DiffOp::dx2);
    flux += zfield * mean_div;
    flux -= zfield * (xi * (broadcast(ubar.c1) * g.a[i][0] + broadcast(ubar.c2) * g.a[i][1]));
    // The bracket is xi u w, which vanishes at both walls: read it as a sine series.
    Field3D odd(xi.basis, Parity::Odd, flux.values);
    for (std::size_t q = 0; q < plane; ++q) {
      odd.values[q] = 0.0;
      odd.values[(B.nz() - 1) * plane + q] = 0.0;
    }
    comp(out, i) = -1.0 * dz(odd);
  }
  return out;
}

ForceBreakdown step_forces(const Field2D& xi_old, const Field2D& xi_new, const VField3D& u,
                           const Params& p) {
  require_positive(xi_old, p.density_floor);
  require_positive(xi_new, p.density_floor);
  const BasisPtr& B = xi_old.basis;
  ForceBreakdown f;

  // Mass flux (xi_old u, xi_old w). Its divergence equals div_x(xi_old ubar);
  // the compressive part uses the dealiased flux that the mass equation sees.
  const VField3D S = vertical_fluctuation_antiderivative(u);
  const Field3D Fz = -1.0 * div_x(VField3D{xi_old * S.c1, xi_old * S.c2});
  const VField3D Fx{xi_old * u.c1, xi_old * u.c2};
  const VField2D ubar = vertical_average(u);
  const Field3D div_mass =
      cpe::broadcast(div_x(VField2D{project(xi_old * ubar.c1), project(xi_old * ubar.c2)}));
  const Tensor2 g = grad_x(u);
  const VField2D gxi = grad_x(xi_new);
  const Field2D lap_xi = diff(xi_new, DiffOp::laplace_x);
  f.convection_x = zero_vfield(B);
  f.convection_z = zero_vfield(B);
  f.eps_commutator = zero_vfield(B);
  for (int i = 0; i < 2; ++i) {
    const Field3D& ui = comp(u, i);
    // Skew-symmetric convection 1/2 [div(F u_i) + F . grad u_i] plus the
    // compressive part 1/2 u_i div F, booked under convection_x.
    Field3D cx = diff(Fx.c1 * ui, DiffOp::dx1) + diff(Fx.c2 * ui, DiffOp::dx2);
    cx += Fx.c1 * g.a[i][0] + Fx.c2 * g.a[i][1];
    cx += ui * div_mass;
    cx *= -0.5;
    Field3D cz = dz(Fz * ui) + Fz * dz(ui);
    cz *= -0.5;
    comp(f.convection_x, i) = std::move(cx);
    comp(f.convection_z, i) = std::move(cz);
    // -eps [1/2 div(grad xi u_i) + 1/2 grad xi . grad u_i - 1/2 u_i lap xi]
    Field3D e = diff(gxi.c1 * ui, DiffOp::dx1) + diff(gxi.c2 * ui, DiffOp::dx2);
    e += gxi.c1 * g.a[i][0] + gxi.c2 * g.a[i][1];
    e -= lap_xi * ui;
    e *= -0.5 * p.eps;
    comp(f.eps_commutator, i) = std::move(e);
  }

  // Pressure-type forces in chemical-potential form -xi_old grad P(mu(xi_new)),
  // with the potential projected onto the band the mass flux lives in.
  const Field2D log_xi = project(map(xi_new, [](double v) { return std::log(v); }));
  f.pressure = broadcast(scale(-1.0, times(xi_old, grad_x(log_xi))));
  const Field2D cold = project(map(xi_new, [](double v) { return std::pow(v, -11.0); }));
  f.cold_pressure_eta = broadcast(scale(10.0 / 11.0 * p.eta, times(xi_old, grad_x(cold))));
  f.quantum_kappa =
      broadcast(scale(p.kappa, times(xi_old, grad_x(project(bohm_potential(xi_new))))));
  f.highorder_delta =
      broadcast(scale(p.delta, times(xi_old, grad_x(diff(xi_new, DiffOp::laplace_x5)))));

  f.drag_r0 = -p.r0 * u;
  const VField3D au = abs_times(u);
  f.damping_r = -p.r * VField3D{xi_new * au.c1, xi_new * au.c2};
  f.hyperviscosity_mu =
      -p.mu * VField3D{diff(u.c1, DiffOp::bilaplace), diff(u.c2, DiffOp::bilaplace)};
  f.horizontal_viscosity = p.nu1 * viscous_divergence(xi_new, strain(u).D);
  f.vertical_viscosity = p.nu2 * VField3D{xi_new * dz(dz(u.c1)), xi_new * dz(dz(u.c2))};
  return f;
}

// ---------------------------------------------------------------------------
// Mass operator and the implicit momentum solve, in coefficient space.

namespace {

struct SpecV {
  Spectrum3D c1, c2;
};

SpecV to_spec(const VField3D& v) { return {to_spectral(v.c1), to_spectral(v.c2)}; }
VField3D to_grid(const SpecV& s) { return {from_spectral(s.c1), from_spectral(s.c2)}; }

double dot(const SpecV& a, const SpecV& b) {
  return spectral_inner(a.c1, b.c1) + spectral_inner(a.c2, b.c2);
}

void axpy(double a, const SpecV& x, SpecV& y) {
  for (std::size_t q = 0; q < x.c1.c.size(); ++q) {
    y.c1.c[q] += a * x.c1.c[q];
    y.c2.c[q] += a * x.c2.c[q];
  }
}

// Constant-coefficient implicit operator
//   L = mu lap^2 + r0 - nu2 xibar dzz - nu1 xibar (lap_x + grad div)
// and the exact inverse of (xibar + dt L) per mode.
struct ImplicitOperator {
  const Basis* B = nullptr;
  double dt = 0.0, xibar = 1.0, mu = 0.0, r0 = 0.0, nu1 = 0.0, nu2 = 0.0;

  // Diagonal part a(q, m) of L and the coefficient b of k k^T.
  void coeffs(std::size_t q, int m, double& a, double& b) const {
    const double lx = B->laplace_x_multiplier()[q];
    const double zz = B->zz_multiplier()[m];
    const double lap = lx + zz;
    a = mu * lap * lap + r0 - nu2 * xibar * zz - nu1 * xibar * lx;
    b = nu1 * xibar;
  }

  // out = L v (spectral).
  SpecV apply(const SpecV& v) const {
    SpecV out = v;
    const std::size_t nc = B->nc2d();
    for (int m = 0; m < B->nz(); ++m) {
      for (std::size_t q = 0; q < nc; ++q) {
        const std::size_t idx = m * nc + q;
        double a, b;
        coeffs(q, m, a, b);
        const double k1 = B->ik1()[q].imag(), k2 = B->ik2()[q].imag();
        const cplx kv = k1 * v.c1.c[idx] + k2 * v.c2.c[idx];
        out.c1.c[idx] = a * v.c1.c[idx] + b * k1 * kv;
        out.c2.c[idx] = a * v.c2.c[idx] + b * k2 * kv;
      }
    }
    return out;
  }

  // (xibar + dt L)^{-1} v, using (aI + b k k^T)^{-1} = (I - b k k^T / (a + b |k|^2)) / a.
  SpecV precondition(const SpecV& v) const {
    SpecV out = v;
    const std::size_t nc = B->nc2d();
    for (int m = 0; m < B->nz(); ++m) {
      for (std::size_t q = 0; q < nc; ++q) {
        const std::size_t idx = m * nc + q;
        double a, b;
        coeffs(q, m, a, b);
        a = xibar + dt * a;
        b = dt * b;
        const double k1 = B->ik1()[q].imag(), k2 = B->ik2()[q].imag();
        const cplx kv = k1 * v.c1.c[idx] + k2 * v.c2.c[idx];
        const double s = b / (a + b * (k1 * k1 + k2 * k2));
        out.c1.c[idx] = (v.c1.c[idx] - s * k1 * kv) / a;
        out.c2.c[idx] = (v.c2.c[idx] - s * k2 * kv) / a;
      }
    }
    return out;
  }
};

// P(xi v) + dt L v for v in the band.
SpecV apply_system(const Field2D& xi, const ImplicitOperator& L, const SpecV& v) {
  const VField3D grid = to_grid(v);
  SpecV out{dealias(to_spectral(xi * grid.c1)), dealias(to_spectral(xi * grid.c2))};
  if (L.dt > 0.0) axpy(L.dt, L.apply(v), out);
  return out;
}

// Preconditioned CG for P(xi .) + dt L on the dealiased band.
SpecV pcg(const Field2D& xi, const ImplicitOperator& L, const SpecV& b, SpecV x, double tol,
          int max_iter, SolveStats& stats) {
  const double bnorm = std::sqrt(std::max(dot(b, b), 0.0));
  stats = {};
  if (bnorm == 0.0) {
    for (auto& c : x.c1.c) c = 0.0;
    for (auto& c : x.c2.c) c = 0.0;
    return x;
  }
  SpecV r = b;
  axpy(-1.0, apply_system(xi, L, x), r);
  double rnorm = std::sqrt(std::max(dot(r, r), 0.0));
  if (rnorm <= tol * bnorm) {
    stats.residual = rnorm / bnorm;
    return x;
  }
  SpecV z = L.precondition(r);
  SpecV p = z;
  double rz = dot(r, z);
  for (int it = 1; it <= max_iter; ++it) {
    const SpecV Ap = apply_system(xi, L, p);
    const double alpha = rz / dot(p, Ap);
    axpy(alpha, p, x);
    axpy(-alpha, Ap, r);
    rnorm = std::sqrt(std::max(dot(r, r), 0.0));
    stats.iterations = it;
    stats.residual = rnorm / bnorm;
    if (rnorm <= tol * bnorm) return x;
    z = L.precondition(r);
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t q = 0; q < p.c1.c.size(); ++q) {
      p.c1.c[q] = z.c1.c[q] + beta * p.c1.c[q];
      p.c2.c[q] = z.c2.c[q] + beta * p.c2.c[q];
    }
  }
  throw NoConvergence(max_iter, stats.residual);
}

SpecV dealias(SpecV s) { return {cpe::dealias(std::move(s.c1)), cpe::dealias(std::move(s.c2))}; }

}  // namespace

VField3D apply_mass_operator(const Field2D& xi, const VField3D& u) {
  require_positive(xi, 0.0);
  return project(VField3D{xi * u.c1, xi * u.c2});
}

VField3D solve_mass_operator(const Field2D& xi, const VField3D& f, double tol, int max_iter,
                             SolveStats* stats) {
  require_positive(xi, 0.0);
  ImplicitOperator L;
  L.B = xi.basis.get();
  L.xibar = mean(xi);
  const SpecV b = dealias(to_spec(f));
  SpecV x = L.precondition(b);
  SolveStats local;
  x = pcg(xi, L, b, x, tol, max_iter, local);
  if (stats) *stats = local;
  return to_grid(x);
}

void check_step_size(const ReducedState& state, const Params& p, double dt) {
  if (!(dt > 0.0)) throw InvalidSpec("dt must be positive");
  const Basis& B = *state.xi.basis;
  double umax = std::max(state.u.c1.max_abs(), state.u.c2.max_abs());
  const double dx = 2.0 * std::numbers::pi / std::max(B.nx1(), B.nx2());
  if (dt * umax > 0.5 * dx) {
    std::ostringstream os;
    os << "dt = " << dt << " exceeds the advective limit 0.5 dx / max|u| = " << 0.5 * dx / umax;
    throw CFLViolation(os.str());
  }
  if (p.delta > 0.0) {
    // Largest |k|^2 kept by dealiasing is at the corner of the band.
    const double k1 = B.nx1() / 3, k2 = B.nx2() / 3;
    const double kmax2 = k1 * k1 + k2 * k2;
    const double limit = 0.5 / (kmax2 * kmax2 * kmax2 * std::sqrt(p.delta * state.xi.max()));
    if (dt > limit) {
      std::ostringstream os;
      os << "dt = " << dt << " exceeds the high-order density limit " << limit;
      throw CFLViolation(os.str());
    }
  }
}

StepReport galerkin_step_report(const ReducedState& state, const Params& p, double dt,
                                const StepOptions& opt) {
  p.validate();
  check_step_size(state, p, dt);
  const Field2D& xi_old = state.xi;
  require_positive(xi_old, p.density_floor);
  const BasisPtr& B = xi_old.basis;

  ImplicitOperator L;
  L.B = B.get();
  L.dt = dt;
  L.mu = p.mu;
  L.r0 = p.r0;
  L.nu1 = p.nu1;
  L.nu2 = p.nu2;

  const VField3D u_old = project(state.u);
  SpecV base = dealias(to_spec(VField3D{xi_old * state.u.c1, xi_old * state.u.c2}));
  if (opt.sources.momentum) axpy(dt, dealias(to_spec(*opt.sources.momentum)), base);

  StepReport rep;
  VField3D u_k = u_old;
  Field2D xi_k = xi_old;
  double change = 0.0;
  for (int it = 1; it <= opt.picard_max; ++it) {
    const VField2D ubar = vertical_average(u_k);
    check_advective_cfl(ubar, dt);
    const Field2D xi_next =
        continuity_step_mean(xi_old, ubar, p.eps, dt, p.density_floor, opt.sources.mass);

    L.xibar = mean(xi_next);
    const SpecV uk_spec = to_spec(u_k);
    // Explicit remainder N = F(u_k) + L u_k so that, at the fixed point, the
    // implicit and explicit pieces combine to the full force.
    SpecV rhs = base;
    axpy(dt, dealias(to_spec(step_forces(xi_old, xi_next, u_k, p).total())), rhs);
    axpy(dt, L.apply(uk_spec), rhs);

    SolveStats stats;
    const SpecV u_spec = pcg(xi_next, L, rhs, uk_spec, opt.cg_tol, opt.cg_max, stats);
    rep.cg_iterations += stats.iterations;
    const VField3D u_next = to_grid(u_spec);

    const double du = l2_norm(u_next - u_k);
    const double dxi = l2_norm(xi_next - xi_k);
    const double tiny = 1e-300;
    const double rel_u = du / std::max(l2_norm(u_k), tiny);
    const double rel_xi = dxi / std::max(l2_norm(xi_k), tiny);
    change = std::max(rel_u, rel_xi);
    if (!std::isfinite(change)) throw PicardDiverged(it, change);
    u_k = u_next;
    xi_k = xi_next;
    rep.picard_iterations = it;
    if (change <= opt.picard_tol) {
      rep.state.t = state.t + dt;
      rep.state.xi = std::move(xi_k);
      rep.state.u = std::move(u_k);
      return rep;
    }
  }
  throw PicardDiverged(opt.picard_max, change);
}

ReducedState galerkin_step(const ReducedState& state, const Params& params, double dt,
                           double picard_tol, int picard_max) {
  StepOptions opt;
  opt.picard_tol = picard_tol;
  opt.picard_max = picard_max;
  return galerkin_step_report(state, params, dt, opt).state;
}

}  // namespace cpe
