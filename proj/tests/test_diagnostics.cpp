/// @file test_diagnostics.cpp
/// @brief Energy, dissipation, BD entropy, identity residuals and inequality checks.

#include <cmath>
#include <numbers>
#include <random>

#include "cpe/diagnostics.hpp"
#include "cpe/errors.hpp"
#include "doctest.h"
#include "test_fields.hpp"

using namespace cpe;
using std::numbers::pi;

namespace {

Params quiet() {
  Params p;
  p.eta = p.kappa = p.delta = 0.0;
  return p;
}

VField3D uniform_x_flow(const BasisPtr& B, double c) {
  return {Field3D::constant(B, c), Field3D(B, Parity::Even)};
}

}  // namespace

TEST_CASE("energy of constant states") {
  auto B = make_basis({16, 16, 9, 0.5});
  const double vol = 4 * pi * pi * 0.5;
  ReducedState one{0.0, Field2D::constant(B, 1.0), zero_vfield(B)};
  CHECK(energy(one, quiet()) == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
  Params p = quiet();
  p.eta = 0.11;
  CHECK(energy(one, p) == doctest::Approx(0.01 * vol).epsilon(1e-13));
  CHECK(energy(one, p) == doctest::Approx(0.19739).epsilon(1e-4));
  ReducedState two{0.0, Field2D::constant(B, 2.0), zero_vfield(B)};
  CHECK(energy(two, quiet()) == doctest::Approx(vol * (2 * std::log(2.0) - 1)).epsilon(1e-13));
  CHECK(energy(two, quiet()) == doctest::Approx(7.6250).epsilon(1e-4));
  CHECK(mass(two.xi) == doctest::Approx(8 * pi * pi));
  ReducedState bad{0.0, Field2D::constant(B, -1.0), zero_vfield(B)};
  CHECK_THROWS_AS(energy(bad, quiet()), DensityNonPositive);
}

TEST_CASE("dissipation integrals") {
  auto B = make_basis({16, 16, 9, 0.5});
  Params p;
  ReducedState rest{0.0, Field2D::constant(B, 1.3), zero_vfield(B)};
  for (const auto& d : dissipation(rest, p)) CHECK(d.value == doctest::Approx(0.0).scale(1.0));

  ReducedState sine{0.0, Field2D::constant(B, 1.0),
                    VField3D{Field3D::from_function(B, Parity::Even, [](double x, double, double) { return std::sin(x); }),
                             Field3D(B, Parity::Even)}};
  CHECK(lookup(dissipation(sine, p), "viscosity_nu1") ==
        doctest::Approx(p.nu1 * 4 * pi * pi * 0.5).epsilon(1e-13));

  const double c = 0.6;
  ReducedState drift{0.0, Field2D::constant(B, 1.0), uniform_x_flow(B, c)};
  CHECK(lookup(dissipation(drift, p), "damping_r") ==
        doctest::Approx(p.r * c * c * c * 4 * pi * pi * 0.5).epsilon(1e-13));

  std::mt19937_64 rng(2);
  ReducedState rnd{0.0, testing::random_density(B, rng),
                   VField3D{testing::random_bandlimited3d(B, Parity::Even, rng),
                            testing::random_bandlimited3d(B, Parity::Even, rng)}};
  for (const auto& d : dissipation(rnd, p)) CHECK(d.value >= -1e-14);
  for (const auto& d : bd_dissipation(rnd, p)) CHECK(d.value >= -1e-14);
  CHECK(dissipation(rnd, p).size() == dissipation_names().size());
  CHECK(bd_dissipation(rnd, p).size() == bd_dissipation_names().size());
}

TEST_CASE("BD entropy") {
  auto B = make_basis({16, 16, 9, 0.5});
  const double vol = 4 * pi * pi * 0.5;
  Params p;
  ReducedState rest{0.0, Field2D::constant(B, 1.0), zero_vfield(B)};
  CHECK(bd_entropy(rest, p) == 0.0);
  const double c = 0.8;
  ReducedState drift{0.0, Field2D::constant(B, 1.0), uniform_x_flow(B, c)};
  CHECK(bd_entropy(drift, p) == doctest::Approx(0.5 * c * c * vol).epsilon(1e-13));

  // xi = 1 + 0.5 cos x1, u = 0, nu1 = 1, r0 = 0: 2 h int |grad xi|^2 / xi.
  Params q = p;
  q.nu1 = 1.0;
  q.r0 = 0.0;
  auto Bf = make_basis({64, 8, 5, 0.5});
  ReducedState bump{0.0, Field2D::from_function(Bf, [](double x, double) { return 1.0 + 0.5 * std::cos(x); }),
                    zero_vfield(Bf)};
  // 1D oracle by a fine midpoint rule.
  const int n = 20000;
  double oracle = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = 2 * pi * (i + 0.5) / n;
    const double s = 0.5 * std::sin(x), xi = 1.0 + 0.5 * std::cos(x);
    oracle += s * s / xi;
  }
  oracle *= 2 * pi / n * 2 * pi * 2.0 * 0.5;
  CHECK(bd_entropy(bump, q) == doctest::Approx(oracle).epsilon(1e-10));

  // Effective-velocity cancellation: u = -2 nu1 grad ln xi, r0 = 0.
  std::mt19937_64 rng(6);
  auto xi = testing::random_density(B, rng);
  auto g = grad_x_broadcast(map(xi, [](double v) { return std::log(v); }));
  ReducedState cancel{0.0, xi, (-2.0 * q.nu1) * g};
  CHECK(std::abs(bd_entropy(cancel, q)) <= 1e-12);
}

TEST_CASE("identity residuals") {
  auto B = make_basis({16, 16, 9, 0.5});
  Params p;
  ReducedState rest{0.0, Field2D::constant(B, 1.4), zero_vfield(B)};
  for (const auto& r : identity_residuals(rest, p)) CHECK(r.value == doctest::Approx(0.0).scale(1.0));

  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 5; ++trial) {
    auto xi = testing::random_density(B, rng);
    VField3D u{testing::random_bandlimited3d(B, Parity::Even, rng),
               testing::random_bandlimited3d(B, Parity::Even, rng)};
    ReducedState s{0.0, xi, u};
    auto res = identity_residuals(s, p);
    const double hxi = l2_norm(xi) + l2_norm(grad_x(xi).c1) + l2_norm(grad_x(xi).c2);
    const double hu = l2_norm(u) + l2_norm(VField3D{diff(u.c1, DiffOp::dx1), diff(u.c2, DiffOp::dx2)});
    CHECK(lookup(res, "bd_cross") <= 1e-9 * hxi * hu);
    auto qf = quantum_force(xi, 2.0);
    CHECK(lookup(res, "quantum") <= 1e-8 * std::sqrt(integrate(qf.c1 * qf.c1 + qf.c2 * qf.c2)));
    const double full = weighted_norm2(xi, grad_x(u));
    CHECK(lookup(res, "norm_split") <= 1e-12 * full);
    CHECK(lookup(res, "w_closure") <= 1e-10 * l2_norm(u) * 10);
  }
}

TEST_CASE("chain-rule BD cross term is sensitive to aliasing") {
  auto B = make_basis({16, 16, 9, 0.5});
  std::mt19937_64 rng(19);
  // Full-band density: every mode populated, including the top third.
  Spectrum2D s{B, std::vector<cplx>(B->nc2d(), 0.0)};
  std::normal_distribution<double> nd(0.0, 1.0);
  for (auto& c : s.c) c = 0.005 * cplx(nd(rng), nd(rng));
  s.c[0] = 1.0;
  auto full = from_spectral(s);
  full = from_spectral(to_spectral(full));  // enforce Hermitian symmetry
  auto band = project(full);
  VField3D u{testing::random_bandlimited3d(B, Parity::Even, rng),
             testing::random_bandlimited3d(B, Parity::Even, rng)};
  CHECK(full.min() > 0.0);
  CHECK(bd_cross_chain_rule(full, u) > bd_cross_chain_rule(band, u));
}

TEST_CASE("w closure residual stays at roundoff for every nz") {
  for (int nz : {5, 9, 17, 33}) {
    auto B = make_basis({16, 16, nz, 0.5});
    auto xi = Field2D::from_function(B, [](double x, double) { return 1.0 + 0.3 * std::sin(x); });
    VField3D u{Field3D::from_function(B, Parity::Even,
                                      [](double x, double, double z) { return std::cos(x) * std::exp(std::cos(2 * pi * z)); }),
               Field3D(B, Parity::Even)};
    const double scale = l2_norm(u) + l2_norm(VField3D{diff(u.c1, DiffOp::dx1), u.c2});
    const double r = lookup(identity_residuals({0.0, xi, u}, Params{}), "w_closure");
    CHECK(r <= 1e-11 * scale);
  }
}

TEST_CASE("inequality checks") {
  auto B = make_basis({16, 16, 9, 0.5});
  Params p;
  DensityBounds bounds = DensityBounds::from_initial(Field2D::constant(B, 1.0));
  ReducedState rest{0.0, Field2D::constant(B, 1.0), zero_vfield(B)};
  std::vector<DiagnosticsRecord> flat;
  for (int n = 0; n < 5; ++n) {
    rest.t = 0.1 * n;
    flat.push_back(diagnose(rest, p, bounds));
  }
  auto rep = check_inequalities(flat, flat[0].energy, flat[0].bd_entropy);
  CHECK(rep.energy_ok);
  CHECK(rep.bd_ok);

  // A short smooth run satisfies the energy inequality; a bumped record is flagged.
  const double h = B->h();
  ReducedState s{0.0, Field2D::from_function(B, [](double x, double) { return 1.0 + 0.1 * std::cos(x); }),
                 VField3D{Field3D::from_function(B, Parity::Even, [h](double x, double y, double z) {
                            return 0.1 * std::sin(x + y) * std::cos(pi * z / h);
                          }),
                          Field3D::from_function(B, Parity::Even, [](double x, double, double) { return 0.05 * std::cos(x); })}};
  std::vector<DiagnosticsRecord> run{diagnose(s, p, bounds, false)};
  for (int n = 0; n < 100; ++n) {
    s = galerkin_step(s, p, 2.5e-4, 1e-12, 100);
    run.push_back(diagnose(s, p, bounds, false));
  }
  const double E0 = run[0].energy;
  auto good = check_inequalities(run, E0, run[0].bd_entropy);
  CHECK(good.energy_ok);
  CHECK(good.energy_excess <= 1e-6);
  for (std::size_t n = 1; n < run.size(); ++n) CHECK(run[n].energy < run[n - 1].energy);

  auto bumped = run;
  bumped[50].energy *= 1.1;
  CHECK_FALSE(check_inequalities(bumped, E0, run[0].bd_entropy).energy_ok);
  CHECK(check_inequalities(bumped, E0, run[0].bd_entropy).first_energy_violation == 50);
}
