#include <doctest.h>

#include <array>
#include <cmath>
#include <memory>
#include <numbers>

#include "pulsefront/error.hpp"
#include "pulsefront/fronts.hpp"
#include "support.hpp"

using namespace pulsefront;
using testsupport::for_all;
using testsupport::Gen;

namespace {

const Nonlinearity& medium() {
  static const Nonlinearity nl([] {
    ReactionParams p;
    p.mode = AmplitudeMode::even;
    return p;
  }());
  return nl;
}

// A coarse library shared by the cases below.
std::shared_ptr<const FrontLibrary> library() {
  static const auto lib = [] {
    FrontLibraryOptions o;
    o.strip.ds = 0.25;
    o.strip.z_points = {4, 4};
    o.lattice_intervals = 2;
    return std::make_shared<const FrontLibrary>(
        build_front_library(medium(), DirectionFan::symmetric_2d(std::numbers::pi / 3), o));
  }();
  return lib;
}

double dot(const std::vector<double>& a, std::span<const double> b) {
  double s = 0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

}  // namespace

TEST_CASE("the library solves the fan directions on a lattice between them") {
  const auto& lib = *library();
  CHECK(lib.angles.size() == 3u);
  CHECK(lib.angles.front() == doctest::Approx(std::numbers::pi / 3));
  CHECK(lib.angles.back() == doctest::Approx(2 * std::numbers::pi / 3));
  CHECK(lib.fan.chat > 0.0);
  CHECK(lib.fan.compat_residual() < 1e-6);
  CHECK(lib.kappa > 0.0);
  CHECK(lib.epsilon_rho == doctest::Approx(0.1 * lib.kappa).epsilon(1e-12));
  for (const auto& f : lib.fronts) CHECK(f.normalization == Normalization::weighted_l2);
  CHECK_THROWS_AS(lib.clamp_angle(0.1), Error);
}

TEST_CASE("lattice values at a node are that node's front") {
  const auto& lib = *library();
  for_all(50, 61, [&](Gen& g, int c) {
    CAPTURE(c);
    const int k = g.integer(0, static_cast<int>(lib.angles.size()) - 1);
    std::array<double, 2> z{g.uniform(0, 1), g.uniform(0, 1)};
    const double s = g.uniform(-5, 5);
    CHECK(lib.lattice_value(lib.angles[k], s, z) ==
          doctest::Approx(evaluate_front(lib.fronts[k], s, z)).epsilon(1e-12).scale(1.0));
  });
}

TEST_CASE("the subsolution is the maximum over the fan fronts") {
  const auto& lib = *library();
  for_all(200, 62, [&](Gen& g, int c) {
    CAPTURE(c);
    const double t = g.uniform(0, 5);
    std::array<double, 2> z{g.uniform(-6, 6), g.uniform(-4, 8)};
    double best = -1;
    int arg = -1;
    for (int i = 0; i < lib.fan.n(); ++i) {
      const auto& f = lib.branch(i);
      const double v = evaluate_front(f, dot(lib.fan.direction(i), z) - f.c * t, z);
      if (v > best) best = v, arg = i;
    }
    int which = -1;
    CHECK(eval_sub(lib, t, z, &which) == doctest::Approx(best).epsilon(1e-14).scale(1.0));
    CHECK(which == arg);
    CHECK(best >= 0.0);
    CHECK(best <= 1.0);
  });
}

TEST_CASE("the facet coordinate is the smallest rescaled projection") {
  const auto& lib = *library();
  for_all(100, 63, [&](Gen& g, int c) {
    CAPTURE(c);
    const double t = g.uniform(0, 5);
    std::array<double, 2> z{g.uniform(-6, 6), g.uniform(-4, 8)};
    double m = 1e300;
    for (int i = 0; i < lib.fan.n(); ++i) {
      const auto e = lib.fan.direction(i);
      m = std::min(m, dot(e, z) / e[1]);
    }
    CHECK(facet_coordinate(lib.fan, t, z) == doctest::Approx(m - lib.fan.chat * t).epsilon(1e-13).scale(1.0));
  });
}

TEST_CASE("the weighted gap with zero rate is the plain sup distance") {
  const auto lib = library();
  auto box = Grid::box({-2.0, -2.0}, {2.0, 4.0}, {9, 13}, BoundaryPolicy::dirichlet_from_field);
  FieldFn a = [&](double t, std::span<const double> z) { return eval_sub(*lib, t, z); };
  FieldFn b = [&](double t, std::span<const double> z) { return 0.9 * eval_sub(*lib, t, z) + 0.01 * z[0]; };
  double sup = 0;
  std::vector<double> x(2);
  for (std::size_t i = 0; i < box->size(); ++i) {
    box->coords(i, x);
    sup = std::max(sup, std::abs(a(1.0, x) - b(1.0, x)));
  }
  CHECK(weighted_gap(a, b, lib->fan, box, 1.0, 0.0) == doctest::Approx(sup).epsilon(1e-14));
  CHECK(weighted_gap(a, b, lib->fan, box, 1.0, 0.5) >= sup);
  CHECK(weighted_gap(a, a, lib->fan, box, 1.0, 0.5) == 0.0);
}

TEST_CASE("the envelope with delta zero is the supersolution") {
  const auto lib = library();
  AnsatzParams p;
  p.alpha = 0.25;
  p.epsilon = 0.05;
  p.beta = 0.5;
  p.delta = 0.0;
  p.lambda = 0.1;
  p.varrho = 4.0;
  for_all(50, 64, [&](Gen& g, int c) {
    CAPTURE(c);
    const double t = g.uniform(0, 3);
    std::array<double, 2> z{g.uniform(-3, 3), g.uniform(-2, 6)};
    CHECK(eval_envelope(*lib, AnsatzKind::w_plus, p, {}, t, z) ==
          doctest::Approx(eval_super(*lib, p, t, z)).epsilon(1e-14).scale(1.0));
  });
}

TEST_CASE("the supersolution adds a nonnegative correction to the modulated front") {
  const auto lib = library();
  AnsatzParams p;
  p.alpha = 0.25;
  p.epsilon = 0.05;
  p.beta = 0.5;
  Ansatz super(AnsatzKind::super, lib, p);
  for_all(100, 65, [&](Gen& g, int c) {
    CAPTURE(c);
    const double t = g.uniform(0, 3);
    std::array<double, 2> z{g.uniform(-3, 3), g.uniform(-2, 6)};
    const double corr = correction_term(*lib, p, t, z);
    CHECK(corr >= 0.0);
    CHECK(corr <= 1.0 + 1e-12);
    CHECK(super(t, z) == doctest::Approx(eval_super(*lib, p, t, z)));
  });
}

TEST_CASE("the weight rate is positive and does not grow with the surface constant") {
  const auto& lib = *library();
  const double a = v_star_estimate(lib, 0.5, 1.0), b = v_star_estimate(lib, 0.5, 2.0);
  CHECK(a > 0.0);
  CHECK(b > 0.0);
  CHECK(b <= a);
  CHECK(a <= lib.kappa2 / 2.0);
}
