#include <doctest.h>

#include <array>
#include <cmath>

#include "pulsefront/error.hpp"
#include "pulsefront/reaction.hpp"
#include "support.hpp"

using namespace pulsefront;
using testsupport::for_all;
using testsupport::Gen;

namespace {

// Written out from the definition, independently of the library's branches.
double g_direct(double u, double theta, double sigma) {
  if (u <= theta) return 0.0;
  return std::exp(-sigma / (u - theta)) * (1.0 - u);
}

ReactionParams params(AmplitudeMode m) {
  ReactionParams p;
  p.mode = m;
  return p;
}

}  // namespace

TEST_CASE("g matches the closed form on (theta, 1] and vanishes below theta") {
  Nonlinearity nl(params(AmplitudeMode::sine_product));
  for_all(500, 11, [&](Gen& g, int i) {
    CAPTURE(i);
    const double u = g.uniform(-0.5, 1.0);
    CHECK(nl.g(u) == doctest::Approx(g_direct(u, 0.3, 0.2)).epsilon(1e-14));
    CHECK(nl.g(u) >= 0.0);
  });
  CHECK(nl.g(0.3) == 0.0);
  CHECK(nl.g(1.0) == 0.0);
  CHECK(nl.g(-1.0) == 0.0);
}

TEST_CASE("g_u and g_uu agree with centered differences") {
  Nonlinearity nl(params(AmplitudeMode::sine_product));
  for_all(300, 12, [&](Gen& g, int i) {
    double u = g.uniform(0.32, 1.4);
    if (std::abs(u - 1.0) < 1e-3) u += 2e-3;
    CAPTURE(i);
    CAPTURE(u);
    const double h = 1e-5;
    const double fd1 = (nl.g(u + h) - nl.g(u - h)) / (2 * h);
    CHECK(nl.g_u(u) == doctest::Approx(fd1).epsilon(1e-6).scale(1.0));
    const double fd2 = (nl.g_u(u + h) - nl.g_u(u - h)) / (2 * h);
    CHECK(nl.g_uu(u) == doctest::Approx(fd2).epsilon(1e-5).scale(1.0));
  });
}

TEST_CASE("linear continuation above 1 uses the slope at 1") {
  Nonlinearity nl(params(AmplitudeMode::sine_product));
  const double slope = -std::exp(-0.2 / 0.7);
  for (double u : {1.0, 1.1, 1.5, 3.0}) CHECK(nl.g(u) == doctest::Approx(slope * (u - 1.0)).epsilon(1e-14));
  // The slope at 1 from the left, by one-sided differences of the closed form.
  const double h = 1e-7;
  const double left = (g_direct(1.0, 0.3, 0.2) - g_direct(1.0 - h, 0.3, 0.2)) / h;
  CHECK(nl.g_u(1.0) == doctest::Approx(left).epsilon(1e-5));
}

TEST_CASE("kappa1 and K1 follow from the amplitude range and the slope at 1") {
  Nonlinearity nl(params(AmplitudeMode::sine_product));
  const double e = std::exp(-0.2 / 0.7);
  CHECK(nl.amplitude_min() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(nl.amplitude_max() == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(nl.kappa1() == doctest::Approx(0.5 * e).epsilon(1e-10));
  CHECK(nl.K1() == doctest::Approx(1.5 * e).epsilon(1e-10));
  CHECK(nl.kappa1() == doctest::Approx(0.3757386465).epsilon(1e-9));
  CHECK(nl.gamma_star() > 0.0);
  CHECK(nl.gamma_star() <= 0.5 * std::min(0.15, 0.7));
}

TEST_CASE("f is periodic in every cell direction") {
  for (auto mode : {AmplitudeMode::sine_product, AmplitudeMode::even}) {
    ReactionParams p = params(mode);
    p.cell.lengths = {1.0, 2.0};
    Nonlinearity nl(p);
    for_all(300, 13, [&](Gen& g, int i) {
      CAPTURE(i);
      std::array<double, 2> z{g.uniform(-3, 3), g.uniform(-3, 3)};
      const double u = g.uniform(0.0, 1.2);
      const int k1 = g.integer(-3, 3), k2 = g.integer(-3, 3);
      std::array<double, 2> w{z[0] + k1 * 1.0, z[1] + k2 * 2.0};
      CHECK(nl.f(w, u) == doctest::Approx(nl.f(z, u)).epsilon(1e-12).scale(1e-12));
      CHECK(nl.f_u(w, u) == doctest::Approx(nl.f_u(z, u)).epsilon(1e-12).scale(1e-12));
    });
  }
}

TEST_CASE("the even medium is symmetric under z1 -> -z1") {
  Nonlinearity nl(params(AmplitudeMode::even));
  for_all(300, 14, [&](Gen& g, int i) {
    CAPTURE(i);
    std::array<double, 2> z{g.uniform(-2, 2), g.uniform(-2, 2)};
    std::array<double, 2> m{-z[0], z[1]};
    CHECK(nl.amplitude(m) == doctest::Approx(nl.amplitude(z)).epsilon(1e-14));
  });
}

TEST_CASE("homogeneous mode has a constant amplitude") {
  ReactionParams p = params(AmplitudeMode::homogeneous);
  p.level = 1.0;
  Nonlinearity nl(p);
  std::array<double, 2> a{0.1, 0.7}, b{0.4, 0.2};
  CHECK(nl.amplitude(a) == 1.0);
  CHECK(nl.amplitude(b) == 1.0);
  CHECK(nl.f_at(1.0, 0.6) == doctest::Approx(g_direct(0.6, 0.3, 0.2)));
}

TEST_CASE("invalid reaction parameters are rejected with invalid_argument") {
  auto code_of = [](ReactionParams p) {
    try {
      Nonlinearity nl(p);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::ok;
  };
  ReactionParams p;
  p.theta = 1.2;
  CHECK(code_of(p) == ErrorCode::invalid_argument);
  p = {};
  p.theta = 0.0;
  CHECK(code_of(p) == ErrorCode::invalid_argument);
  p = {};
  p.sigma = -1.0;
  CHECK(code_of(p) == ErrorCode::invalid_argument);
  p = {};
  p.modulation = 1.0;
  CHECK(code_of(p) == ErrorCode::invalid_argument);
  p = {};
  p.cell.lengths = {1.0, -1.0};
  CHECK(code_of(p) == ErrorCode::invalid_argument);
  CHECK(code_of(ReactionParams{}) == ErrorCode::ok);
}

TEST_CASE("non-finite inputs are refused") {
  Nonlinearity nl(ReactionParams{});
  std::array<double, 2> z{0.1, 0.2};
  CHECK_THROWS_AS(nl.f(z, std::nan("")), Error);
}

TEST_CASE("the hypothesis checks pass on the default media") {
  for (auto mode : {AmplitudeMode::sine_product, AmplitudeMode::even}) {
    Nonlinearity nl(params(mode));
    const auto rep = verify_hypotheses(nl);
    INFO(rep.summary());
    CHECK(rep.passed());
    CHECK(rep.find("kappa1_positive") != nullptr);
  }
}
