#include <doctest.h>

#include <array>
#include <cmath>
#include <numbers>

#include "pulsefront/error.hpp"
#include "pulsefront/geometry.hpp"
#include "support.hpp"

using namespace pulsefront;
using testsupport::for_all;
using testsupport::Gen;

namespace {

DirectionFan three_fan() {
  DirectionFan f;
  f.nu = {{-1.0}, {1.0}, {1.0}};
  f.theta = {std::numbers::pi / 3, std::numbers::pi / 4, std::numbers::pi / 2};
  return f;
}

}  // namespace

TEST_CASE("surface checks pass on the symmetric fan") {
  const auto rep = check_surface(DirectionFan::symmetric_2d(std::numbers::pi / 3));
  INFO(rep.summary());
  CHECK(rep.passed());
}

TEST_CASE("the surface at the ridge of the symmetric fan is ln 2 / sin theta") {
  for (double th : {0.4, std::numbers::pi / 3, 1.2}) {
    const auto fan = DirectionFan::symmetric_2d(th);
    std::array<double, 1> x{0.0};
    CHECK(solve_phi(fan, x).phi == doctest::Approx(std::log(2.0) / std::sin(th)).epsilon(1e-12));
  }
}

TEST_CASE("Newton and bisection roots agree, lie above psi and solve the equation") {
  for (const auto& fan : {DirectionFan::symmetric_2d(std::numbers::pi / 3), three_fan()}) {
    for_all(300, 51, [&](Gen& g, int c) {
      CAPTURE(c);
      std::array<double, 1> x{g.uniform(-15, 15)};
      const auto s = solve_phi(fan, x);
      CHECK(s.phi == doctest::Approx(solve_phi_bisection(fan, x)).epsilon(1e-10).scale(1.0));
      CHECK(s.phi >= psi(fan, x));
      double sum = 0;
      for (int i = 0; i < fan.n(); ++i) sum += std::exp(-q(fan, i, x, s.phi));
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(s.h >= 0.0);
    });
  }
}

TEST_CASE("C3 of the symmetric fan is twice the cotangent") {
  // With E_i = exp(-q_i) summing to one, phi' = cot(E_1 - E_2) and h = 2 E_1 E_2, so
  // min_i |phi' + nu_i cot| / h = cot / max(E_1, E_2), largest at x = 0.
  for (double th : {std::numbers::pi / 3, 1.1}) {
    const auto fan = DirectionFan::symmetric_2d(th);
    const double expected = 2.0 / std::tan(th);
    CHECK(estimate_c3(fan, 10.0, 401) == doctest::Approx(expected).epsilon(1e-9));
    CHECK(estimate_c3(fan, 20.0, 801) == doctest::Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("e(x) is a unit vector with a positive last component") {
  const auto fan = three_fan();
  for_all(200, 52, [&](Gen& g, int c) {
    CAPTURE(c);
    std::array<double, 1> x{g.uniform(-10, 10)};
    const auto e = e_field(fan, x, g.uniform(0.01, 1.0));
    CHECK(std::hypot(e[0], e[1]) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(e[1] > 0.0);
  });
}

TEST_CASE("xi is eta divided by the gradient factor") {
  const auto fan = DirectionFan::symmetric_2d(std::numbers::pi / 3);
  fan.validate();
  for_all(100, 53, [&](Gen& g, int c) {
    CAPTURE(c);
    const double alpha = g.uniform(0.05, 1.0), t = g.uniform(0, 5), y = g.uniform(-5, 5);
    std::array<double, 1> x{g.uniform(-5, 5)};
    std::array<double, 1> ax{alpha * x[0]};
    const auto s = solve_phi(fan, ax);
    const auto fc = frame_coords(s, 0.7, alpha, t, y);
    CHECK(fc.eta == doctest::Approx(y - 0.7 * t - s.phi / alpha));
    CHECK(fc.xi == doctest::Approx(fc.eta / std::sqrt(1.0 + s.grad_norm2())));
  });
}

TEST_CASE("omega is a smooth monotone step from 0 to 1") {
  CHECK(omega(-1.0).w == 0.0);
  CHECK(omega(-3.0).w == 0.0);
  CHECK(omega(1.0).w == doctest::Approx(1.0));
  CHECK(omega(5.0).w == 1.0);
  CHECK(omega(0.0).w == doctest::Approx(0.5).epsilon(1e-12));
  double prev = 0.0;
  for (int i = 0; i <= 400; ++i) {
    const double s = -1.0 + i / 200.0;
    const auto o = omega(s);
    CHECK(o.w >= prev - 1e-15);
    CHECK(o.d1 >= 0.0);
    CHECK(o.w + omega(-s).w == doctest::Approx(1.0).epsilon(1e-12));
    prev = o.w;
  }
  for_all(100, 54, [](Gen& g, int c) {
    CAPTURE(c);
    const double s = g.uniform(-0.95, 0.95), h = 1e-5;
    CHECK(omega(s).d1 == doctest::Approx((omega(s + h).w - omega(s - h).w) / (2 * h)).epsilon(1e-5).scale(1.0));
    CHECK(omega(s).d2 == doctest::Approx((omega(s + h).d1 - omega(s - h).d1) / (2 * h)).epsilon(1e-4).scale(1.0));
  });
}

TEST_CASE("malformed fans are refused") {
  DirectionFan f = DirectionFan::symmetric_2d(std::numbers::pi / 3);
  f.theta[0] = 0.0;
  CHECK_THROWS_AS(f.validate(), Error);
  f = DirectionFan::symmetric_2d(std::numbers::pi / 3);
  f.theta[1] = 2.0;
  CHECK_THROWS_AS(f.validate(), Error);
  f = DirectionFan::symmetric_2d(std::numbers::pi / 3);
  f.nu[0] = {0.5};
  CHECK_THROWS_AS(f.validate(), Error);
}

TEST_CASE("compatible speeds give a common chat") {
  auto f = DirectionFan::symmetric_2d(std::numbers::pi / 3);
  const double s = std::sin(std::numbers::pi / 3);
  f.set_speeds({0.6 * s, 0.6 * s});
  CHECK(f.chat == doctest::Approx(0.6));
  CHECK(f.compat_residual() == doctest::Approx(0.0).scale(1.0));
  CHECK(f.polar_angle(0) == doctest::Approx(2 * std::numbers::pi / 3));
  CHECK(f.polar_angle(1) == doctest::Approx(std::numbers::pi / 3));
}
