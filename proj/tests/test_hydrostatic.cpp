/// @file test_hydrostatic.cpp
/// @brief Vertical averages, w reconstruction and the stratified lift.

#include <cmath>
#include <numbers>
#include <random>

#include "cpe/errors.hpp"
#include "cpe/hydrostatic.hpp"
#include "doctest.h"
#include "test_fields.hpp"

using namespace cpe;
using std::numbers::pi;

namespace {

VField3D shear_column(const BasisPtr& B) {
  const double h = B->h();
  auto u1 = Field3D::from_function(B, Parity::Even, [h](double x, double, double z) {
    return std::sin(x) * std::cos(pi * z / h);
  });
  return {u1, Field3D(B, Parity::Even)};
}

}  // namespace

TEST_CASE("vertical average and cumulative integral") {
  auto B = make_basis({16, 16, 9, 0.5});
  auto u1 = Field3D::from_function(B, Parity::Even, [](double x, double, double z) {
    return std::cos(x) * (1.0 + std::cos(pi * z / 0.5));
  });
  VField3D u{u1, Field3D::constant(B, 2.0)};
  auto bar = vertical_average(u);
  auto cx = Field2D::from_function(B, [](double x, double) { return std::cos(x); });
  CHECK(testing::max_diff(bar.c1.values, cx.values) <= 1e-14);
  CHECK(testing::max_diff(bar.c2.values, Field2D::constant(B, 2.0).values) <= 1e-14);

  // int_0^z (1 + cos(pi z / h)) = z + (h/pi) sin(pi z / h)
  auto cum = vertical_cumulative(u);
  double worst = 0.0;
  for (int k = 0; k < B->nz(); ++k)
    for (int j = 0; j < B->nx2(); ++j)
      for (int i = 0; i < B->nx1(); ++i) {
        const double z = B->z(k);
        const double e1 = std::cos(B->x1(i)) * (z + 0.5 / pi * std::sin(pi * z / 0.5));
        const std::size_t idx = u1.index(i, j, k);
        worst = std::max(worst, std::abs(cum.c1[idx] - e1));
        worst = std::max(worst, std::abs(cum.c2[idx] - 2.0 * z));
      }
  CHECK(worst <= 1e-14);
}

TEST_CASE("w for a single vertical shear mode") {
  auto B = make_basis({16, 16, 9, 0.5});
  const double h = B->h();
  auto xi = Field2D::constant(B, 1.0);
  auto u = shear_column(B);
  auto w = reconstruct_w(xi, u);
  CHECK(w.parity == Parity::Odd);
  auto expect = Field3D::from_function(B, Parity::Odd, [h](double x, double, double z) {
    return -(h / pi) * std::cos(x) * std::sin(pi * z / h);
  });
  CHECK(testing::max_diff(w.values, expect.values) <= 1e-13);

  auto dzw = reconstruct_dz_w(xi, u);
  auto expect_dz = Field3D::from_function(B, Parity::Even, [h](double x, double, double z) {
    return -std::cos(x) * std::cos(pi * z / h);
  });
  CHECK(testing::max_diff(dzw.values, expect_dz.values) <= 1e-13);
}

TEST_CASE("w with variable density") {
  auto B = make_basis({16, 16, 13, 0.5});
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 5; ++trial) {
    auto xi = testing::random_density(B, rng);
    VField3D u{testing::random_bandlimited3d(B, Parity::Even, rng),
               testing::random_bandlimited3d(B, Parity::Even, rng)};
    auto w = reconstruct_w(xi, u);
    auto dzw = reconstruct_dz_w(xi, u);
    const std::size_t plane = B->n2d();
    double ends = 0.0;
    for (std::size_t q = 0; q < plane; ++q) {
      ends = std::max(ends, std::abs(w.values[q]));
      ends = std::max(ends, std::abs(w.values[(B->nz() - 1) * plane + q]));
    }
    CHECK(ends == 0.0);
    // Closed-form dz w agrees with the spectral z-derivative of w.
    auto dz_direct = diff(w, DiffOp::dz);
    CHECK(testing::max_diff(dz_direct.values, dzw.values) <= 1e-11 * std::max(1.0, dzw.max_abs()));
    // Column integral of dz w vanishes because w = 0 at both ends.
    auto col = vertical_average(VField3D{dzw, dzw}).c1;
    CHECK(col.max_abs() <= 1e-12 * std::max(1.0, dzw.max_abs()));
  }
}

TEST_CASE("density floor is enforced") {
  auto B = make_basis({8, 8, 5, 0.5});
  auto xi = Field2D::from_function(B, [](double x, double) { return std::cos(x); });
  auto u = zero_vfield(B);
  CHECK_THROWS_AS(reconstruct_w(xi, u), DensityNonPositive);
  CHECK_THROWS_AS(reconstruct_dz_w(xi, u), DensityNonPositive);
}

TEST_CASE("lift to the stratified variables") {
  auto B = make_basis({16, 16, 9, 0.5});
  const double H = height_for(B->h());
  CHECK(H == doctest::Approx(std::log(2.0)).epsilon(1e-15));

  ReducedState s;
  s.t = 0.25;
  s.xi = Field2D::from_function(B, [](double x, double y) { return 1.0 + 0.3 * std::cos(x) * std::sin(y); });
  s.u = shear_column(B);

  CHECK_THROWS_AS(lift_to_original(s, H + 1e-6), HeightMismatch);
  CHECK_THROWS_AS(lift_to_original(s, H, 100), InvalidSpec);

  auto L = lift_to_original(s, H);
  CHECK(L.ny == 513);
  CHECK(L.t == 0.25);
  CHECK(L.v_amplification == doctest::Approx(2.0));
  CHECK(hydrostatic_residual(L) <= 1e-10);
  // Mass: int xi dx * (1 - e^{-H}) = 4 pi^2 * h.
  CHECK(std::abs(lifted_mass(L) - 4 * pi * pi * B->h()) <= 1e-10);

  double vtop = 0.0, vbot = 0.0;
  for (std::size_t q = 0; q < B->n2d(); ++q) {
    vbot = std::max(vbot, std::abs(L.v[L.index(q, 0)]));
    vtop = std::max(vtop, std::abs(L.v[L.index(q, L.ny - 1)]));
  }
  CHECK(vbot <= 1e-14);
  CHECK(vtop <= 1e-13);

  auto back = reduce_from_original(L);
  CHECK(back.t == 0.25);
  CHECK(testing::max_diff(back.xi.values, s.xi.values) == 0.0);
  CHECK(testing::max_diff(back.u.c1.values, s.u.c1.values) <= 1e-10);
  CHECK(testing::max_diff(back.u.c2.values, s.u.c2.values) <= 1e-14);
}
