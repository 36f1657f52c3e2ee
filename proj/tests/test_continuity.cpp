/// @file test_continuity.cpp
/// @brief Mass equation rates, the IMEX step and the density envelope.

#include <cmath>
#include <random>

#include "cpe/continuity.hpp"
#include "cpe/errors.hpp"
#include "cpe/hydrostatic.hpp"
#include "doctest.h"
#include "test_fields.hpp"

using namespace cpe;

namespace {

VField2D zero2d(const BasisPtr& B) { return {Field2D(B), Field2D(B)}; }

}  // namespace

TEST_CASE("continuity_rhs on single modes") {
  auto B = make_basis({16, 16, 9, 0.5});
  CHECK(continuity_rhs(Field2D::constant(B, 1.0), zero2d(B), 0.3).max_abs() == 0.0);

  auto xi = Field2D::from_function(B, [](double x, double) { return 1.0 + 0.5 * std::cos(x); });
  auto rate = continuity_rhs(xi, zero2d(B), 0.1);
  auto expect = Field2D::from_function(B, [](double x, double) { return -0.05 * std::cos(x); });
  CHECK(testing::max_diff(rate.values, expect.values) <= 1e-14);

  VField2D ub{Field2D::from_function(B, [](double x, double) { return std::sin(x); }), Field2D(B)};
  auto adv = continuity_rhs(Field2D::constant(B, 1.0), ub, 0.0);
  auto expect_adv = Field2D::from_function(B, [](double x, double) { return -std::cos(x); });
  CHECK(testing::max_diff(adv.values, expect_adv.values) <= 1e-13);
  // Cross-check against a centred finite difference of -xi ubar.
  const double d = 1e-5;
  for (int i = 0; i < B->nx1(); ++i) {
    const double x = B->x1(i);
    const double fd = -(std::sin(x + d) - std::sin(x - d)) / (2 * d);
    CHECK(adv(i, 3) == doctest::Approx(fd).epsilon(1e-8).scale(1.0));
  }
  CHECK_THROWS_AS(continuity_rhs(xi, zero2d(B), -1.0), InvalidSpec);
}

TEST_CASE("implicit diffusion decays a heat mode exactly") {
  auto B = make_basis({16, 16, 9, 0.5});
  auto xi = Field2D::from_function(B, [](double x, double) { return 1.0 + 0.5 * std::cos(x); });
  const double eps = 0.1, dt = 0.01;
  auto next = continuity_step(xi, zero_vfield(B), eps, dt);
  auto expect = Field2D::from_function(
      B, [&](double x, double) { return 1.0 + 0.5 * std::cos(x) / (1.0 + eps * dt); });
  CHECK(testing::max_diff(next.values, expect.values) <= 1e-12);

  // Unconditional stability: deviation from the mean never grows, any dt.
  auto f = xi;
  double prev = l2_norm(f - Field2D::constant(B, 1.0));
  for (double big : {1.0, 10.0, 1000.0}) {
    f = continuity_step(f, zero_vfield(B), eps, big);
    const double now = l2_norm(f - Field2D::constant(B, 1.0));
    CHECK(now <= prev);
    prev = now;
  }
}

TEST_CASE("constant density under divergence-free advection") {
  auto B = make_basis({16, 16, 9, 0.5});
  // u = (dpsi/dx2, -dpsi/dx1) with psi = cos x1 cos x2.
  auto u1 = Field3D::from_function(B, Parity::Even,
                                   [](double x, double y, double) { return -std::cos(x) * std::sin(y); });
  auto u2 = Field3D::from_function(B, Parity::Even,
                                   [](double x, double y, double) { return std::sin(x) * std::cos(y); });
  auto xi = Field2D::constant(B, 1.7);
  for (int s = 0; s < 10; ++s) xi = continuity_step(xi, VField3D{u1, u2}, 0.05, 0.01);
  CHECK(testing::max_diff(xi.values, Field2D::constant(B, 1.7).values) <= 1e-12);
}

TEST_CASE("mass is conserved and the envelope holds") {
  auto B = make_basis({16, 16, 9, 0.5});
  std::mt19937_64 rng(4);
  auto xi = testing::random_density(B, rng, 0.8, 1.2);
  VField3D u{testing::random_bandlimited3d(B, Parity::Even, rng, 0.05),
             testing::random_bandlimited3d(B, Parity::Even, rng, 0.05)};
  const double m0 = integrate(xi);
  auto bounds = DensityBounds::from_initial(xi);
  const auto ubar = vertical_average(u);
  double drift = 0.0;
  bool inside = true;
  for (int s = 0; s < 1000; ++s) {
    xi = continuity_step(xi, u, 0.05, 1e-3);
    bounds = update_bounds(bounds, ubar, 1e-3);
    drift = std::max(drift, std::abs(integrate(xi) - m0) / m0);
    inside = inside && xi.min() >= bounds.lower - 1e-10 && xi.max() <= bounds.upper + 1e-10;
  }
  CHECK(drift <= 1e-13);
  CHECK(inside);
}

TEST_CASE("bounds bookkeeping") {
  auto B = make_basis({8, 8, 5, 0.5});
  auto xi = Field2D::from_function(B, [](double x, double) { return 1.0 + 0.5 * std::cos(x); });
  auto b0 = DensityBounds::from_initial(xi);
  CHECK(b0.lower == doctest::Approx(0.5));
  CHECK(b0.upper == doctest::Approx(1.5));
  auto same = update_bounds(b0, zero2d(B), 0.1);
  CHECK(same.lower == b0.lower);
  CHECK(same.upper == b0.upper);
  // ubar = (sin x1, 0): max |div ubar| = 1.
  VField2D ub{Field2D::from_function(B, [](double x, double) { return std::sin(x); }), Field2D(B)};
  auto b1 = update_bounds(b0, ub, 0.1);
  CHECK(b1.lower == doctest::Approx(0.5 * std::exp(-0.1)).epsilon(1e-14));
  CHECK(b1.upper == doctest::Approx(1.5 * std::exp(0.1)).epsilon(1e-14));
}

TEST_CASE("step guards") {
  auto B = make_basis({16, 16, 9, 0.5});
  auto u1 = Field3D::constant(B, 10.0);
  VField3D u{u1, Field3D(B, Parity::Even)};
  CHECK_THROWS_AS(continuity_step(Field2D::constant(B, 1.0), u, 0.0, 0.1), CFLViolation);
  auto xi = Field2D::from_function(B, [](double x, double) { return 1e-9 + 0.0 * x; });
  CHECK_THROWS_AS(continuity_step(xi, zero_vfield(B), 0.0, 0.1), DensityNonPositive);
}
