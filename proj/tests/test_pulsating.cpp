#include <doctest.h>

#include <array>
#include <cmath>
#include <numbers>

#include "pulsefront/experiments.hpp"
#include "pulsefront/pulsating.hpp"
#include "support.hpp"

using namespace pulsefront;

namespace {

double g_closed(double u) {
  const double theta = 0.3, sigma = 0.2;
  if (u <= theta) return 0.0;
  return std::exp(-sigma / (u - theta)) * (1.0 - u);
}

// Speed of U'' + cU' + g(U) = 0 from 1 to 0. The slope p = U' is integrated as a function of U
// downward from the unstable manifold of U = 1 to the ignition level, where the front ahead
// (U' = -cU) fixes p(theta) = -c theta. The sign of the mismatch is bisected.
double shooting_oracle() {
  const double theta = 0.3, sigma = 0.2;
  const double gp1 = -std::exp(-sigma / (1.0 - theta));
  auto mismatch = [&](double c) {
    const double lam = 0.5 * (-c + std::sqrt(c * c - 4.0 * gp1));
    const double d0 = 1e-7;
    double U = 1.0 - d0, p = -lam * d0;
    const int n = 200000;
    const double h = -(U - theta) / n;
    auto rhs = [&](double u, double q) { return -c - g_closed(u) / q; };
    for (int i = 0; i < n; ++i) {
      const double k1 = rhs(U, p);
      const double k2 = rhs(U + h / 2, p + h / 2 * k1);
      const double k3 = rhs(U + h / 2, p + h / 2 * k2);
      const double k4 = rhs(U + h, p + h * k3);
      p += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
      U += h;
      if (p >= 0.0) return 1.0;
    }
    return p + c * theta;
  };
  double lo = 0.05, hi = 3.0;
  const double slo = mismatch(lo) > 0 ? 1.0 : -1.0;
  REQUIRE((mismatch(hi) > 0 ? 1.0 : -1.0) != slo);
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    ((mismatch(mid) > 0 ? 1.0 : -1.0) == slo ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Nonlinearity homogeneous() {
  ReactionParams p;
  p.mode = AmplitudeMode::homogeneous;
  p.level = 1.0;
  return Nonlinearity(p);
}

Nonlinearity even_medium() {
  ReactionParams p;
  p.mode = AmplitudeMode::even;
  return Nonlinearity(p);
}

StripSpec flat_strip(double ds) {
  StripSpec s;
  s.ds = ds;
  s.z_points = {1, 1};
  return s;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("the library shooting speed agrees with an independent shooting oracle") {
  const double oracle = shooting_oracle();
  CHECK(oracle == doctest::Approx(0.612661142410224).epsilon(1e-6));
  CHECK(shooting_speed_1d(homogeneous()) == doctest::Approx(oracle).epsilon(1e-6));
}

TEST_CASE("homogeneous front speed converges to the shooting speed") {
  const double oracle = shooting_oracle();
  const auto nl = homogeneous();
  const auto e = direction_from_angle(std::numbers::pi / 2);
  const auto coarse = solve_pulsating_front(e, nl, flat_strip(0.25));
  const auto fine = solve_pulsating_front(e, nl, flat_strip(0.125), {}, &coarse);
  CHECK(rel(fine.c, oracle) < 0.01);
  CHECK(rel(coarse.c, fine.c) < 0.003);
  CHECK(rel(fine.c, oracle) <= rel(coarse.c, oracle));
  // Any direction gives the same speed in a homogeneous medium.
  const auto tilted = solve_pulsating_front(direction_from_angle(0.3), nl, flat_strip(0.125), {}, &fine);
  CHECK(tilted.c == doctest::Approx(fine.c).epsilon(1e-6));
}

TEST_CASE("direction_from_angle gives unit vectors") {
  testsupport::for_all(100, 41, [](testsupport::Gen& g, int c) {
    CAPTURE(c);
    const auto e = direction_from_angle(g.uniform(-7, 7));
    CHECK(std::hypot(e[0], e[1]) == doctest::Approx(1.0).epsilon(1e-15));
  });
}

TEST_CASE("a front in the periodic medium has the defining properties") {
  const auto nl = even_medium();
  StripSpec strip;
  const auto fr = solve_pulsating_front(direction_from_angle(std::numbers::pi / 2), nl, strip);
  CHECK(fr.c > 0.0);
  CHECK(fr.residual < 1e-8);
  CHECK(fr.boundary_top < 1e-8);
  CHECK(fr.boundary_bottom < 1e-8);
  CHECK(max_interior_ds(fr) < 0.0);
  CHECK(fr.normalization == Normalization::pointwise);

  // min over the torus nodes at s = 0 is the normalization level.
  double mn = 1e9;
  const int n = strip.z_points[0];
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      std::array<double, 2> z{static_cast<double>(i) / n, static_cast<double>(j) / n};
      mn = std::min(mn, evaluate_front(fr, 0.0, z));
    }
  CHECK(mn == doctest::Approx(0.65).epsilon(1e-12));

  // Periodic in z, with the limits 1 behind and 0 ahead.
  std::array<double, 2> z{0.3, 0.6}, zs{1.3, -0.4};
  CHECK(evaluate_front(fr, 1.7, z) == doctest::Approx(evaluate_front(fr, 1.7, zs)).epsilon(1e-10));
  CHECK(evaluate_front(fr, -200.0, z) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(evaluate_front(fr, 200.0, z) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));

  const auto d = decay_diagnostics(fr);
  CHECK(d.lambda_rel_dev < 0.05);
  CHECK(d.ratio_rel_dev < 0.05);
  CHECK(d.c2_sign < 0.0);
  CHECK(interior_slope_bound(fr, 1.0) > 0.0);
  CHECK(profile_residual(fr, nl) == doctest::Approx(fr.residual).epsilon(1e-6).scale(1e-12));
}

TEST_CASE("renormalization is idempotent and fixes the weighted functional") {
  const auto nl = homogeneous();
  StripSpec strip = flat_strip(0.125);
  const auto fr = solve_pulsating_front(direction_from_angle(std::numbers::pi / 2), nl, strip);
  const double eps = 0.06;
  const auto once = renormalize(fr, Normalization::weighted_l2, eps);
  const auto twice = renormalize(once.front, Normalization::weighted_l2, eps);
  CHECK(std::abs(twice.shift) < 1e-10);
  CHECK(once.front.normalization == Normalization::weighted_l2);
  // Shifting the profile moves the functional monotonically, so the fixed point is unique.
  const double here = weighted_l2_functional(once.front, eps);
  CHECK(weighted_l2_functional(once.front, eps, -0.5) > here);
  CHECK(weighted_l2_functional(once.front, eps, 0.5) < here);
  const auto back = renormalize(once.front, Normalization::pointwise);
  CHECK(back.front.s_offset == doctest::Approx(fr.s_offset).epsilon(1e-9).scale(1.0));
}

TEST_CASE("mirror directions have equal speeds in the x-symmetric medium") {
  const auto nl = even_medium();
  StripSpec strip;
  const double a = std::numbers::pi / 3;
  const auto f1 = solve_pulsating_front(direction_from_angle(a), nl, strip);
  const auto f2 = solve_pulsating_front(direction_from_angle(std::numbers::pi - a), nl, strip, {}, &f1);
  CHECK(rel(f1.c, f2.c) < 1e-6);
}

TEST_CASE("speed map interpolation passes through its samples") {
  SpeedMap m;
  m.angles = {0.0, 0.5, 1.0, 1.5};
  m.speeds = {1.0, 1.2, 1.1, 1.3};
  for (std::size_t k = 0; k < m.angles.size(); ++k)
    CHECK(interpolate_speed(m, m.angles[k]) == doctest::Approx(m.speeds[k]).epsilon(1e-12));
  CHECK(interpolate_speed(m, 0.75) > 1.0);
}

TEST_CASE("invalid directions are refused") {
  const auto nl = homogeneous();
  CHECK_THROWS_AS(solve_pulsating_front({1.0, 0.0, 0.0}, nl, flat_strip(0.25)), Error);
}
