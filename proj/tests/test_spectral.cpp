/// @file test_spectral.cpp
/// @brief Basis, transforms, derivatives, dealiasing and quadrature.

#include <cmath>
#include <numbers>
#include <random>

#include "cpe/errors.hpp"
#include "cpe/spectral.hpp"
#include "doctest.h"
#include "test_fields.hpp"

using namespace cpe;
using std::numbers::pi;

TEST_CASE("make_basis validates the domain") {
  CHECK_THROWS_AS(make_basis({9, 8, 5, 0.5}), InvalidSpec);
  CHECK_THROWS_AS(make_basis({8, 6, 5, 0.5}), InvalidSpec);
  CHECK_THROWS_AS(make_basis({8, 8, 4, 0.5}), InvalidSpec);
  CHECK_THROWS_AS(make_basis({8, 8, 3, 0.5}), InvalidSpec);
  CHECK_THROWS_AS(make_basis({8, 8, 5, 1.0}), InvalidSpec);
  CHECK_NOTHROW(make_basis({8, 8, 5, 0.5}));
}

TEST_CASE("eigenvalues of the basis") {
  auto B = make_basis({8, 8, 5, 0.5});
  CHECK(B->nc3d() == static_cast<std::size_t>(5 * 8 * 5));
  CHECK(B->n3d() == static_cast<std::size_t>(8 * 8 * 5));
  CHECK(B->eigenvalue(0, 0, 0) == 0.0);
  CHECK(B->eigenvalue(1, 0, 0) == doctest::Approx(1.0));
  CHECK(B->eigenvalue(0, 0, 1) == doctest::Approx(4 * pi * pi));
  CHECK(B->z(0) == 0.0);
  CHECK(B->z(4) == doctest::Approx(0.5));

  // Discrete Laplacian of the sampled vertical mode reproduces the eigenvalue.
  auto mode = Field3D::from_function(B, Parity::Even,
                                     [](double, double, double z) { return std::cos(pi * z / 0.5); });
  auto lap = diff(mode, DiffOp::laplace);
  for (std::size_t q = 0; q < mode.values.size(); ++q)
    CHECK(lap.values[q] == doctest::Approx(-4 * pi * pi * mode.values[q]).epsilon(1e-12).scale(1.0));
}

TEST_CASE("discrete orthonormality of the basis") {
  auto B = make_basis({8, 8, 5, 0.5});
  const int top = B->top_mode();
  // Sample every normalized mode as complex grid values.
  struct Mode {
    std::vector<cplx> v;
  };
  std::vector<Mode> modes;
  for (int m = 0; m <= top; ++m) {
    const double wz = (m == 0 || m == top) ? B->h() : 0.5 * B->h();
    const double norm = 1.0 / std::sqrt(4 * pi * pi * wz);
    for (int j = 0; j < B->nx2(); ++j) {
      for (int k1i = 0; k1i < B->nx1(); ++k1i) {
        const int k1 = k1i < B->nx1() / 2 ? k1i : k1i - B->nx1();
        const int k2 = B->wavenumber2(j) == B->nx2() / 2 ? -B->nx2() / 2 : B->wavenumber2(j);
        Mode md;
        for (int k = 0; k < B->nz(); ++k)
          for (int jj = 0; jj < B->nx2(); ++jj)
            for (int ii = 0; ii < B->nx1(); ++ii)
              md.v.push_back(norm * std::exp(cplx(0, k1 * B->x1(ii) + k2 * B->x2(jj))) *
                             std::cos(B->z_wavenumber(m) * B->z(k)));
        modes.push_back(std::move(md));
      }
    }
  }
  REQUIRE(modes.size() == 8u * 8u * 5u);
  const double cell = 4 * pi * pi / B->n2d();
  double worst = 0.0;
  for (std::size_t a = 0; a < modes.size(); ++a) {
    for (std::size_t b = a; b < modes.size(); ++b) {
      cplx s = 0.0;
      for (int k = 0; k < B->nz(); ++k)
        for (std::size_t q = 0; q < B->n2d(); ++q) {
          const std::size_t idx = k * B->n2d() + q;
          s += B->z_weights()[k] * modes[a].v[idx] * std::conj(modes[b].v[idx]);
        }
      s *= cell;
      worst = std::max(worst, std::abs(s - (a == b ? 1.0 : 0.0)));
    }
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("transform examples and round trip") {
  auto B = make_basis({16, 16, 9, 0.5});
  auto c3 = to_spectral(Field3D::constant(B, 3.0));
  CHECK(std::abs(c3.at(0, 0, 0) - 3.0) < 1e-14);
  double rest = 0.0;
  for (std::size_t q = 1; q < c3.c.size(); ++q) rest = std::max(rest, std::abs(c3.c[q]));
  CHECK(rest < 1e-14);

  auto cosx = to_spectral(Field2D::from_function(B, [](double x, double) { return std::cos(x); }));
  CHECK(std::abs(cosx.at(1, 0) - 0.5) < 1e-14);  // k = +1; its conjugate partner -1 is implied
  for (std::size_t q = 0; q < cosx.c.size(); ++q)
    if (q != 1) CHECK(std::abs(cosx.c[q]) < 1e-14);

  std::mt19937_64 rng(7);
  for (Parity p : {Parity::Even, Parity::Odd}) {
    auto f = testing::random_bandlimited3d(B, p, rng);
    auto g = from_spectral(to_spectral(f));
    CHECK(testing::max_diff(f.values, g.values) <= 1e-13 * f.max_abs());
  }
  auto f2 = testing::random_bandlimited2d(B, rng);
  auto g2 = from_spectral(to_spectral(f2));
  CHECK(testing::max_diff(f2.values, g2.values) <= 1e-13 * f2.max_abs());
}

TEST_CASE("spectral derivatives") {
  auto B = make_basis({16, 16, 9, 0.5});
  auto s = Field2D::from_function(B, [](double x, double) { return std::sin(x); });
  auto c = Field2D::from_function(B, [](double x, double) { return std::cos(x); });
  CHECK(testing::max_diff(diff(s, DiffOp::dx1).values, c.values) <= 1e-12);
  auto lap = diff(c, DiffOp::laplace_x);
  CHECK(testing::max_diff(lap.values, (-1.0 * c).values) <= 1e-12);

  auto c2 = Field2D::from_function(B, [](double x, double) { return std::cos(2 * x); });
  auto l5 = diff(c2, DiffOp::laplace_x5);
  CHECK(testing::max_diff(l5.values, (-1024.0 * c2).values) <= 1e-10 * 1024);
  auto rep = c2;
  for (int i = 0; i < 5; ++i) rep = diff(rep, DiffOp::laplace_x);
  CHECK(testing::max_diff(l5.values, rep.values) <= 1e-10 * 1024);

  CHECK_THROWS_AS(diff(c, DiffOp::dz), UnsupportedAxis);

  // dz maps cosines to sines on the same grid.
  auto cz = Field3D::from_function(B, Parity::Even,
                                   [](double, double, double z) { return std::cos(pi * z / 0.5); });
  auto dz = diff(cz, DiffOp::dz);
  CHECK(dz.parity == Parity::Odd);
  auto expect = Field3D::from_function(
      B, Parity::Odd, [](double, double, double z) { return -(pi / 0.5) * std::sin(pi * z / 0.5); });
  CHECK(testing::max_diff(dz.values, expect.values) <= 1e-12 * (pi / 0.5));
}

TEST_CASE("laplace_x^5 equals five laplace_x on random 1/3-band fields") {
  auto B = make_basis({16, 16, 9, 0.5});
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    auto f = testing::random_bandlimited3d(B, Parity::Even, rng);
    auto l5 = diff(f, DiffOp::laplace_x5);
    auto rep = f;
    for (int i = 0; i < 5; ++i) rep = diff(rep, DiffOp::laplace_x);
    CHECK(testing::max_diff(l5.values, rep.values) <= 1e-10 * l5.max_abs());
  }
}

TEST_CASE("dealiasing") {
  auto B = make_basis({24, 24, 13, 0.5});
  std::mt19937_64 rng(3);
  auto f = testing::random_bandlimited3d(B, Parity::Even, rng);
  auto pf = project(f);
  CHECK(testing::max_diff(f.values, pf.values) <= 1e-13 * f.max_abs());

  auto nyq = Field2D::from_function(B, [](double x, double) { return std::cos(12 * x); });
  CHECK(project(nyq).max_abs() < 1e-14);

  // Product of two band fields, dealiased, equals the truncation of the exact
  // product computed on a grid fine enough to hold it.
  auto f2 = testing::random_bandlimited3d(B, Parity::Even, rng);
  auto prod = project(f * f2);
  auto Bf = make_basis({48, 48, 25, 0.5});
  auto ff = from_spectral(resample(to_spectral(f), Bf));
  auto ff2 = from_spectral(resample(to_spectral(f2), Bf));
  auto exact = from_spectral(dealias(resample(to_spectral(ff * ff2), B)));
  CHECK(testing::max_diff(prod.values, exact.values) <= 1e-12 * exact.max_abs());
}

TEST_CASE("quadrature") {
  auto B = make_basis({16, 16, 9, 0.5});
  CHECK(integrate(Field3D::constant(B, 1.0)) == doctest::Approx(4 * pi * pi * 0.5).epsilon(1e-14));
  CHECK(integrate(Field3D::constant(B, 1.0)) == doctest::Approx(19.7392088).epsilon(1e-8));
  auto cx = Field3D::from_function(B, Parity::Even, [](double x, double, double) { return std::cos(x); });
  CHECK(std::abs(integrate(cx)) < 1e-13);
  auto cz = Field3D::from_function(B, Parity::Even,
                                   [](double, double, double z) { return std::cos(pi * z / 0.5); });
  CHECK(std::abs(integrate(cz)) < 1e-12);
}

TEST_CASE("Parseval and summation by parts") {
  auto B = make_basis({16, 16, 9, 0.5});
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    auto f = testing::random_bandlimited3d(B, Parity::Even, rng);
    auto g = testing::random_bandlimited3d(B, Parity::Even, rng);
    const double direct = integrate(f * g);
    const double coeff = spectral_inner(to_spectral(f), to_spectral(g));
    CHECK(std::abs(direct - coeff) <= 1e-12 * std::max(1.0, std::abs(direct)));

    const double scale = l2_norm(VField3D{f, f}) * l2_norm(VField3D{g, g});
    const double ibp_x = integrate(f * diff(g, DiffOp::dx1)) + integrate(g * diff(f, DiffOp::dx1));
    CHECK(std::abs(ibp_x) <= 1e-12 * scale);

    // f even and s odd: f * s vanishes at both ends, so no boundary term.
    auto s = testing::random_bandlimited3d(B, Parity::Odd, rng);
    const double ibp_z = integrate(f * diff(s, DiffOp::dz)) + integrate(s * diff(f, DiffOp::dz));
    CHECK(std::abs(ibp_z) <= 1e-12 * scale * 10);
  }
}

TEST_CASE("resample preserves shared modes") {
  auto B = make_basis({16, 16, 9, 0.5});
  auto Bf = make_basis({32, 32, 17, 0.5});
  std::mt19937_64 rng(9);
  auto f = testing::random_bandlimited3d(B, Parity::Even, rng);
  auto back = from_spectral(resample(resample(to_spectral(f), Bf), B));
  CHECK(testing::max_diff(f.values, back.values) <= 1e-13 * f.max_abs());
  // Evaluating the series at a grid height reproduces the stored plane.
  auto plane = evaluate_at_height(to_spectral(f), B->z(3));
  double worst = 0.0;
  for (std::size_t q = 0; q < B->n2d(); ++q)
    worst = std::max(worst, std::abs(plane.values[q] - f.values[3 * B->n2d() + q]));
  CHECK(worst <= 1e-13 * f.max_abs());
}
