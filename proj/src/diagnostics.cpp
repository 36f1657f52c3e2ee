#include "cpe/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cpe/errors.hpp"

namespace cpe {

namespace {

void require_positive(const Field2D& xi, double floor) {
  const double mn = xi.min();
  if (!(mn > floor)) throw DensityNonPositive(mn, floor);
}

Field2D sq(const Field2D& f) { return f * f; }
Field2D norm2(const VField2D& v) { return v.c1 * v.c1 + v.c2 * v.c2; }
Field3D norm2(const VField3D& v) { return v.c1 * v.c1 + v.c2 * v.c2; }

Field2D fn(const Field2D& xi, double (*f)(double)) { return map(xi, f); }

// Frobenius norm squared of the horizontal Hessian of f.
Field2D hessian_norm2(const Field2D& f) {
  const Field2D fx = diff(f, DiffOp::dx1);
  const Field2D fy = diff(f, DiffOp::dx2);
  const Field2D h11 = diff(fx, DiffOp::dx1);
  const Field2D h12 = diff(fx, DiffOp::dx2);
  const Field2D h22 = diff(fy, DiffOp::dx2);
  return sq(h11) + 2.0 * sq(h12) + sq(h22);
}

// Pieces shared between the energy and BD dissipation lists.
struct Shared {
  double h = 0.0;
  double grad_sqrt = 0.0;    // int_T2 |grad sqrt xi|^2
  double grad_inv5 = 0.0;    // int_T2 |grad xi^-5|^2
  double hess_log = 0.0;     // int_T2 xi |hess ln xi|^2
  double lap3 = 0.0;         // int_T2 |lap^3 xi|^2
  double grad_log = 0.0;     // int_T2 |grad xi|^2 / xi^2
  double u2 = 0.0;           // int |u|^2
  double xi_u3 = 0.0;        // int xi |u|^3
  double xi_D = 0.0;         // int xi |D|^2
  double xi_A = 0.0;         // int xi |A|^2
  double xi_dzu = 0.0;       // int xi |dz u|^2
  double lap_u = 0.0;        // int |lap u|^2
};

Shared shared_integrals(const ReducedState& s, double floor) {
  const Field2D& xi = s.xi;
  const VField3D& u = s.u;
  require_positive(xi, floor);
  Shared r;
  r.h = xi.basis->h();
  const Field2D root = fn(xi, [](double v) { return std::sqrt(v); });
  r.grad_sqrt = integrate(norm2(grad_x(root)));
  const Field2D inv5 = fn(xi, [](double v) { return std::pow(v, -5.0); });
  r.grad_inv5 = integrate(norm2(grad_x(inv5)));
  const Field2D logxi = fn(xi, [](double v) { return std::log(v); });
  r.hess_log = integrate(xi * hessian_norm2(logxi));
  r.lap3 = integrate(sq(diff(xi, DiffOp::laplace_x3)));
  const VField2D gxi = grad_x(xi);
  Field2D q = norm2(gxi);
  for (std::size_t i = 0; i < q.values.size(); ++i) q.values[i] /= xi.values[i] * xi.values[i];
  r.grad_log = integrate(q);

  const Field3D speed2 = norm2(u);
  r.u2 = integrate(speed2);
  Field3D speed3 = speed2;
  for (double& v : speed3.values) v = std::pow(v, 1.5);
  r.xi_u3 = integrate(xi * speed3);
  const Strain st = strain(u);
  r.xi_D = weighted_norm2(xi, st.D);
  r.xi_A = weighted_norm2(xi, st.A);
  const Field3D d1 = diff(u.c1, DiffOp::dz), d2 = diff(u.c2, DiffOp::dz);
  r.xi_dzu = integrate(xi * (d1 * d1 + d2 * d2));
  const Field3D l1 = diff(u.c1, DiffOp::laplace), l2 = diff(u.c2, DiffOp::laplace);
  r.lap_u = integrate(l1 * l1 + l2 * l2);
  return r;
}

}  // namespace

double lookup(const std::vector<Named>& list, const std::string& name) {
  for (const auto& n : list)
    if (n.name == name) return n.value;
  throw std::out_of_range("no entry named " + name);
}

double total(const std::vector<Named>& list) {
  double s = 0.0;
  for (const auto& n : list) s += n.value;
  return s;
}

const std::vector<std::string>& dissipation_names() {
  static const std::vector<std::string> names = {
      "eps_density",    "drag_r0",           "damping_r",    "viscosity_nu1",
      "viscosity_nu2",  "hyperviscosity_mu", "cold_eta_eps", "quantum_kappa_eps",
      "delta_eps"};
  return names;
}

const std::vector<std::string>& bd_dissipation_names() {
  static const std::vector<std::string> names = {
      "bd_dzw",       "bd_grad_sqrt_xi",      "bd_damping_r",     "bd_viscosity_nu2",
      "bd_cold_eta",  "bd_hyperviscosity_mu", "bd_quantum_kappa", "bd_drag_r0",
      "bd_delta",     "bd_rotation",          "bd_eps_drag"};
  return names;
}

const std::vector<std::string>& identity_residual_names() {
  static const std::vector<std::string> names = {"bd_cross", "quantum", "norm_split", "w_closure"};
  return names;
}

double mass(const Field2D& xi) { return integrate(xi); }

double energy(const ReducedState& s, const Params& p) {
  const Field2D& xi = s.xi;
  require_positive(xi, p.density_floor);
  const double h = xi.basis->h();
  const double kinetic = 0.5 * integrate(xi * norm2(s.u));
  Field2D pot = fn(xi, [](double v) { return v * std::log(v) - v + 1.0; });
  if (p.eta > 0.0) pot += (p.eta / 11.0) * fn(xi, [](double v) { return std::pow(v, -10.0); });
  if (p.kappa > 0.0) pot += p.kappa * norm2(grad_x(fn(xi, [](double v) { return std::sqrt(v); })));
  if (p.delta > 0.0) {
    const Field2D lap2 = diff(xi, DiffOp::bilaplace);
    pot += (0.5 * p.delta) * norm2(grad_x(lap2));
  }
  return kinetic + h * integrate(pot);
}

std::vector<Named> dissipation(const ReducedState& s, const Params& p) {
  const Shared r = shared_integrals(s, p.density_floor);
  const std::vector<double> v = {
      4.0 * p.eps * r.h * r.grad_sqrt,
      p.r0 * r.u2,
      p.r * r.xi_u3,
      2.0 * p.nu1 * r.xi_D,
      p.nu2 * r.xi_dzu,
      p.mu * r.lap_u,
      0.4 * p.eta * p.eps * r.h * r.grad_inv5,
      0.5 * p.kappa * p.eps * r.h * r.hess_log,
      p.delta * p.eps * r.h * r.lap3};
  std::vector<Named> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back({dissipation_names()[i], v[i]});
  return out;
}

double bd_entropy(const ReducedState& s, const Params& p) {
  const Field2D& xi = s.xi;
  require_positive(xi, p.density_floor);
  const Field2D logxi = fn(xi, [](double v) { return std::log(v); });
  const VField3D g = grad_x_broadcast(logxi);
  const VField3D v = s.u + (2.0 * p.nu1) * g;
  return 0.5 * integrate(xi * norm2(v)) - 2.0 * p.nu1 * p.r0 * xi.basis->h() * integrate(logxi);
}

std::vector<Named> bd_dissipation(const ReducedState& s, const Params& p) {
  const Shared r = shared_integrals(s, p.density_floor);
  const Field3D dzw = reconstruct_dz_w(s.xi, s.u, p.density_floor);
  const double xi_dzw = integrate(s.xi * (dzw * dzw));
  const std::vector<double> v = {
      2.0 * p.nu1 * xi_dzw,
      8.0 * p.nu1 * r.h * r.grad_sqrt,
      p.r * r.xi_u3,
      p.nu2 * r.xi_dzu,
      1.6 * p.eta * p.nu1 * r.h * r.grad_inv5,
      p.mu * r.lap_u,
      p.kappa * p.nu1 * r.h * r.hess_log,
      p.r0 * r.u2,
      2.0 * p.delta * p.nu1 * r.h * r.lap3,
      2.0 * p.nu1 * r.xi_A,
      p.nu1 * p.r0 * p.eps * r.h * r.grad_log};
  std::vector<Named> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back({bd_dissipation_names()[i], v[i]});
  return out;
}

namespace {

double bd_cross_with(const Field2D& xi, const VField3D& u, const VField3D& glog) {
  const Strain st = strain(u);
  double sum = 0.0;
  for (int i = 0; i < 2; ++i) {
    const Field3D d = diff(xi * st.A.a[i][0], DiffOp::dx1) + diff(xi * st.A.a[i][1], DiffOp::dx2);
    sum += integrate(d * (i == 0 ? glog.c1 : glog.c2));
  }
  return std::abs(sum);
}

}  // namespace

double bd_cross_chain_rule(const Field2D& xi, const VField3D& u) {
  VField2D g = grad_x(xi);
  for (std::size_t q = 0; q < xi.values.size(); ++q) {
    g.c1.values[q] /= xi.values[q];
    g.c2.values[q] /= xi.values[q];
  }
  return bd_cross_with(xi, u, VField3D{broadcast(g.c1), broadcast(g.c2)});
}

std::vector<Named> identity_residuals(const ReducedState& s, const Params& p, int oversample) {
  const Field2D& xi = s.xi;
  const VField3D& u = s.u;
  require_positive(xi, p.density_floor);
  const Basis& B = *xi.basis;
  std::vector<Named> out;

  const Field2D logxi = fn(xi, [](double v) { return std::log(v); });
  out.push_back({"bd_cross", bd_cross_with(xi, u, grad_x_broadcast(logxi))});

  // Both quantum forms involve sqrt and log of xi, so evaluate them where the
  // composite functions are resolved.
  const int f = std::max(1, oversample);
  const BasisPtr fine = make_basis({B.nx1() * f, B.nx2() * f, 5, B.h()});
  const Field2D xf = from_spectral(resample(to_spectral(xi), fine));
  require_positive(xf, p.density_floor);
  const VField2D a = quantum_force_direct(xf, 2.0, p.density_floor);
  const VField2D b = quantum_force(xf, 2.0, p.density_floor);
  const Field2D d1 = a.c1 - b.c1, d2 = a.c2 - b.c2;
  out.push_back({"quantum", std::sqrt(integrate(d1 * d1 + d2 * d2))});

  const Strain st = strain(u);
  const double full = weighted_norm2(xi, grad_x(u));
  out.push_back({"norm_split",
                 std::abs(full - weighted_norm2(xi, st.D) - weighted_norm2(xi, st.A))});

  const Field3D w = reconstruct_w(xi, u, p.density_floor);
  Field3D res = diff(diff(w, DiffOp::dz), DiffOp::dz);
  Field3D ddiv = diff(div_x(VField3D{xi * u.c1, xi * u.c2}), DiffOp::dz);
  const std::size_t plane = B.n2d();
  for (std::size_t q = 0; q < ddiv.values.size(); ++q) ddiv.values[q] /= xi.values[q % plane];
  res += ddiv;
  out.push_back({"w_closure", std::sqrt(std::max(0.0, integrate(res * res)))});
  return out;
}

DiagnosticsRecord diagnose(const ReducedState& s, const Params& p, const DensityBounds& bounds,
                           bool with_identities) {
  DiagnosticsRecord r;
  r.t = s.t;
  r.mass = mass(s.xi);
  r.energy = energy(s, p);
  r.bd_entropy = bd_entropy(s, p);
  r.min_xi = s.xi.min();
  r.max_xi = s.xi.max();
  r.bound_lower = bounds.lower;
  r.bound_upper = bounds.upper;
  r.dissipation = dissipation(s, p);
  r.bd_dissipation = bd_dissipation(s, p);
  if (with_identities) {
    r.identity_residuals = identity_residuals(s, p);
  } else {
    for (const auto& n : identity_residual_names()) r.identity_residuals.push_back({n, 0.0});
  }
  return r;
}

InequalityReport check_inequalities(const std::vector<DiagnosticsRecord>& records, double E0,
                                    double BD0, const InequalityOptions& opt) {
  InequalityReport rep;
  if (records.empty()) return rep;
  rep.energy_violation = -INFINITY;
  rep.bd_violation = -INFINITY;
  double cum_e = 0.0, cum_bd = 0.0;
  const double scale = std::max(std::abs(E0), 1e-300);
  for (std::size_t n = 0; n < records.size(); ++n) {
    if (n > 0) {
      const double dt = records[n].t - records[n - 1].t;
      cum_e += dt * total(records[n].dissipation);
      cum_bd += dt * total(records[n].bd_dissipation);
    }
    const double lhs_e = records[n].energy + cum_e;
    const double ve = lhs_e - E0 * (1.0 + opt.energy_rel_slack);
    rep.energy_excess = std::max(rep.energy_excess, (lhs_e - E0) / scale);
    if (ve > rep.energy_violation) rep.energy_violation = ve;
    if (ve > 0.0 && rep.first_energy_violation < 0) rep.first_energy_violation = static_cast<long>(n);
    const double vb = records[n].bd_entropy + cum_bd - (BD0 + E0 + opt.bd_slack);
    if (vb > rep.bd_violation) rep.bd_violation = vb;
    if (vb > 0.0 && rep.first_bd_violation < 0) rep.first_bd_violation = static_cast<long>(n);
  }
  rep.energy_ok = rep.first_energy_violation < 0;
  rep.bd_ok = rep.first_bd_violation < 0;
  return rep;
}

}  // namespace cpe
