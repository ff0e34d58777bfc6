#include <doctest.h>

#include <array>
#include <cmath>
#include <memory>

#include "pulsefront/error.hpp"
#include "pulsefront/evolution.hpp"
#include "pulsefront/experiments.hpp"
#include "support.hpp"

using namespace pulsefront;
using testsupport::for_all;
using testsupport::Gen;

namespace {

Nonlinearity medium() {
  ReactionParams p;
  p.mode = AmplitudeMode::even;
  return Nonlinearity(p);
}

GridPtr small_box(double h = 0.25) {
  const int n = static_cast<int>(std::lround(2.0 / h)) + 1;
  return Grid::box({-1.0, -1.0}, {1.0, 1.0}, {n, n}, BoundaryPolicy::dirichlet_from_field);
}

// One explicit Euler step written out node by node: five-point Laplacian, forward difference
// for the comoving advection, reaction at the lab position. Boundary nodes are kept.
Field euler_oracle(const Field& u, double t, double dt, double chat, const Nonlinearity& nl) {
  const Grid& g = *u.grid;
  const int nx = g.axis(0).count, ny = g.axis(1).count;
  const double hx = g.axis(0).spacing, hy = g.axis(1).spacing;
  Field out = u;
  auto at = [&](int i, int j) { return u.values[static_cast<std::size_t>(i) * ny + j]; };
  for (int i = 1; i + 1 < nx; ++i)
    for (int j = 1; j + 1 < ny; ++j) {
      const double c = at(i, j);
      const double lap = (at(i - 1, j) - 2 * c + at(i + 1, j)) / (hx * hx) + (at(i, j - 1) - 2 * c + at(i, j + 1)) / (hy * hy);
      const double adv = chat * (at(i, j + 1) - c) / hy;
      std::array<double, 2> z{g.axis(0).coord(i), g.axis(1).coord(j) + chat * t};
      out.values[static_cast<std::size_t>(i) * ny + j] = c + dt * (lap + adv + nl.f(z, c));
    }
  out.time = t + dt;
  return out;
}

}  // namespace

TEST_CASE("the time step limit follows the monotonicity bound") {
  const auto nl = medium();
  auto box = Grid::box({0.0, 0.0}, {1.0, 2.0}, {5, 17}, BoundaryPolicy::dirichlet_from_field);
  const double hx = 0.25, hy = 0.125;
  const double expected = 0.9 / (2 / (hx * hx) + 2 / (hy * hy) + nl.lipschitz());
  CHECK(cfl_dt(nl, *box) == doctest::Approx(expected).epsilon(1e-14));
  const double with_adv = 0.9 / (2 / (hx * hx) + 2 / (hy * hy) + 0.7 / hy + nl.lipschitz());
  CHECK(cfl_dt(nl, *box, 0.7) == doctest::Approx(with_adv).epsilon(1e-14));
}

TEST_CASE("one step matches a node-by-node Euler update in both frames") {
  const auto nl = medium();
  auto box = small_box();
  for_all(20, 71, [&](Gen& g, int c) {
    CAPTURE(c);
    CauchyConfig cc;
    cc.box = box;
    cc.boundary_source = BoundarySource::frozen_initial;
    double chat = 0.0;
    if (g.coin()) {
      cc.frame = Frame::comoving;
      chat = g.uniform(0.0, 1.5);
      cc.chat = chat;
    }
    Field u(box, g.vec(box->size(), 0.0, 1.0));
    const double t = g.uniform(0, 3);
    const double dt = cfl_dt(nl, *box, chat) * g.uniform(0.2, 1.0);
    cc.dt = dt;
    const Field got = step(u, t, cc, nl, {});
    const Field want = euler_oracle(u, t, dt, chat, nl);
    CHECK(sup_norm_diff(got, want) < 1e-14);
    CHECK(got.time == doctest::Approx(t + dt));
  });
}

TEST_CASE("a step larger than the monotone limit is refused") {
  const auto nl = medium();
  CauchyConfig cc;
  cc.box = small_box();
  cc.boundary_source = BoundarySource::frozen_initial;
  cc.dt = 2.0 * cfl_dt(nl, *cc.box);
  Field u(cc.box, 0.5);
  try {
    step(u, 0.0, cc, nl, {});
    FAIL("expected a CFL error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::cfl_violation);
  }
}

TEST_CASE("ordered data stay ordered and inside [0, 1]") {
  // Pairs are smooth random waves plus a nonnegative gap that is sometimes zero on patches.
  const auto nl = medium();
  auto box = small_box();
  std::size_t order = 0, range = 0, clamps = 0;
  for_all(200, 72, [&](Gen& g, int c) {
    CAPTURE(c);
    CauchyConfig cc;
    cc.box = box;
    cc.boundary_source = BoundarySource::frozen_initial;
    if (c % 3 == 0) {
      cc.frame = Frame::comoving;
      cc.chat = g.uniform(0.0, 1.5);
    }
    const double k1 = g.uniform(0.5, 4), k2 = g.uniform(0.5, 4), ph = g.uniform(0, 6), mid = g.uniform(0.2, 0.8);
    const double gap = g.uniform(0.0, 0.4);
    Field u(box), v(box);
    std::vector<double> z(2);
    for (std::size_t i = 0; i < box->size(); ++i) {
      box->coords(i, z);
      const double base = std::clamp(mid + 0.4 * std::sin(k1 * z[0] + ph) * std::cos(k2 * z[1]), 0.0, 1.0);
      u.values[i] = base;
      v.values[i] = std::min(1.0, base + (z[0] > 0 ? gap * g.uniform(0, 1) : 0.0));
    }
    StepStats su, sv;
    double t = 0.0;
    for (int k = 0; k < 1000; ++k) {
      u = step(u, t, cc, nl, {}, &su);
      v = step(v, t, cc, nl, {}, &sv);
      t = u.time;
      for (std::size_t i = 0; i < box->size(); ++i) {
        order += u.values[i] > v.values[i];
        range += u.values[i] < 0.0 || v.values[i] > 1.0 || v.values[i] < 0.0 || u.values[i] > 1.0;
      }
    }
    clamps += su.clamped_interior + sv.clamped_interior;
  });
  CHECK(order == 0u);
  CHECK(range == 0u);
  CHECK(clamps == 0u);
}

TEST_CASE("the library comparison check reports no violations on a short run") {
  const auto rep = check_comparison_principle(medium(), 10, 100, 3);
  INFO(rep.summary());
  CHECK(rep.passed());
}

TEST_CASE("constant states 0 and 1 are fixed points") {
  const auto nl = medium();
  CauchyConfig cc;
  cc.box = small_box();
  cc.boundary_source = BoundarySource::frozen_initial;
  for (double level : {0.0, 1.0}) {
    Field u(cc.box, level);
    for (int k = 0; k < 20; ++k) u = step(u, u.time, cc, nl, {});
    for (double x : u.values) CHECK(x == doctest::Approx(level).scale(1.0).epsilon(1e-15));
  }
}

TEST_CASE("Dirichlet data come from the boundary field at the new time") {
  const auto nl = medium();
  CauchyConfig cc;
  cc.box = small_box();
  cc.boundary_source = BoundarySource::sub;
  FieldFn bnd = [](double t, std::span<const double> z) { return 0.25 + 0.1 * z[0] * z[1] + 0.01 * t; };
  Field u(cc.box, 0.5);
  const Field w = step(u, 1.0, cc, nl, bnd);
  std::vector<double> z(2);
  for (std::size_t i = 0; i < cc.box->size(); ++i) {
    if (!cc.box->is_boundary(i)) continue;
    cc.box->coords(i, z);
    CHECK(w.values[i] == doctest::Approx(bnd(w.time, z)).epsilon(1e-14));
  }
  CHECK_THROWS_AS(step(u, 1.0, cc, nl, {}), Error);
}

TEST_CASE("initial data outside [0, 1] are refused") {
  const auto nl = medium();
  CauchyConfig cc;
  cc.box = small_box();
  cc.boundary_source = BoundarySource::frozen_initial;
  Field u(cc.box, 1.5);
  CHECK_THROWS_AS(solve_cauchy(u, cc, nl, {}), Error);
}

TEST_CASE("bump has peak one and compact support") {
  std::array<double, 2> c{0.5, -0.5};
  CHECK(bump(c, c, 2.0) == 1.0);
  for_all(300, 73, [&](Gen& g, int k) {
    CAPTURE(k);
    std::array<double, 2> z{g.uniform(-4, 4), g.uniform(-4, 4)};
    const double r = std::hypot(z[0] - c[0], z[1] - c[1]);
    const double b = bump(z, c, 2.0);
    if (r >= 2.0) {
      CHECK(b == 0.0);
    } else {
      CHECK(b >= 0.0);
      CHECK(b <= 1.0);
      if (r < 1.8) CHECK(b > 0.0);
      CHECK(b <= bump(c, c, 2.0));
    }
  });
}

TEST_CASE("the tracked window shifts by one cell per period") {
  const auto nl = medium();
  WindowSpec ws;
  ws.half_width = 1.0;
  ws.below = 2.0;
  ws.above = 2.0;
  ws.h = 0.25;
  auto win = std::make_shared<const TrackedWindow>(nl, 0.6, ws);
  const int m = win->steps_per_period();
  CHECK(m >= 1);
  CHECK(win->dt() <= win->cfl());
  CHECK(win->period() == doctest::Approx(1.0 / 0.6));
  CHECK(win->dt() * m == doctest::Approx(win->period()).epsilon(1e-12));
  CHECK(win->grid(m)->axis(1).lo == doctest::Approx(win->grid(0)->axis(1).lo + 1.0));
  CHECK(win->offset(m - 1) == 0);
  CHECK(win->offset(m) == 1);

  PeriodicFront pf;
  pf.window = win;
  Gen g(74);
  for (int p = 0; p < m; ++p) pf.phases.push_back(g.vec(win->base()->size(), 0, 1));
  for_all(20, 75, [&](Gen& gg, int c) {
    CAPTURE(c);
    const long k = gg.integer(0, 3 * m);
    const Field a = pf.at_step(k), b = pf.at_step(k + m);
    CHECK(b.grid->axis(1).lo == doctest::Approx(a.grid->axis(1).lo + 1.0));
    CHECK(a.values == b.values);
  });
}

TEST_CASE("aligned distance finds a phase shift") {
  const auto nl = medium();
  WindowSpec ws;
  ws.half_width = 1.0;
  ws.below = 2.0;
  ws.above = 2.0;
  ws.h = 0.25;
  auto win = std::make_shared<const TrackedWindow>(nl, 0.6, ws);
  const int m = win->steps_per_period();
  PeriodicFront a, b;
  a.window = b.window = win;
  Gen g(76);
  for (int p = 0; p < m; ++p) a.phases.push_back(g.vec(win->base()->size(), 0, 1));
  const int k = m / 3;
  for (int p = 0; p < m; ++p) b.phases.push_back(a.phases[(p + k) % m]);
  long shift = 99;
  CHECK(aligned_distance(a, a, &shift) == 0.0);
  CHECK(shift == 0);
  CHECK(aligned_distance(a, b, &shift) == 0.0);
  CHECK(shift == -k);
  CHECK(aligned_distance(b, a, &shift) == 0.0);
  CHECK(shift == k);
}
