#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "pulsefront/blocktridiag.hpp"
#include "pulsefront/error.hpp"
#include "pulsefront/spline.hpp"
#include "support.hpp"

using namespace pulsefront;
using testsupport::for_all;
using testsupport::Gen;

TEST_CASE("tensor spline reproduces nodal values on boxes and tori") {
  Gen g(31);
  auto box = Grid::box({0.0, -1.0}, {2.0, 1.0}, {9, 7}, BoundaryPolicy::dirichlet_from_field);
  PeriodCell cell;
  auto torus = Grid::torus(cell, {8, 6});
  for (auto grid : {box, torus}) {
    Field f(grid, g.vec(grid->size(), -1, 1));
    TensorSpline sp(f);
    std::vector<double> x(2);
    for (std::size_t i = 0; i < grid->size(); ++i) {
      grid->coords(i, x);
      CHECK(sp(x) == doctest::Approx(f.values[i]).epsilon(1e-10).scale(1.0));
    }
  }
}

TEST_CASE("tensor spline is exact for linear data and its axis-0 derivative matches") {
  auto grid = Grid::box({0.0, 0.0}, {1.0, 1.0}, {9, 9}, BoundaryPolicy::dirichlet_from_field);
  Field f = sample(grid, [](std::span<const double> x) { return 2 * x[0] - x[1] + 0.5; });
  TensorSpline sp(f);
  for_all(100, 32, [&](Gen& g, int c) {
    CAPTURE(c);
    std::vector<double> x{g.uniform(0, 1), g.uniform(0, 1)};
    double d0 = 0;
    CHECK(sp.eval_d0(x, d0) == doctest::Approx(2 * x[0] - x[1] + 0.5).epsilon(1e-10));
    CHECK(d0 == doctest::Approx(2.0).epsilon(1e-9));
  });
}

TEST_CASE("trigonometric cardinal weights sum to one and are nodal deltas") {
  for (int n : {4, 5, 8}) {
    std::vector<double> w(n);
    for_all(50, 33, [&](Gen& g, int c) {
      CAPTURE(c);
      StripInterpolant::trig_weights(n, 1.0, g.uniform(-2, 2), w.data());
      double s = 0;
      for (double v : w) s += v;
      CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    });
    for (int k = 0; k < n; ++k) {
      StripInterpolant::trig_weights(n, 1.0, static_cast<double>(k) / n, w.data());
      for (int j = 0; j < n; ++j) CHECK(w[j] == doctest::Approx(j == k ? 1.0 : 0.0).scale(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("trigonometric weights reproduce a low harmonic exactly") {
  const int n = 8;
  std::vector<double> w(n);
  const double k = 2 * std::numbers::pi;
  for_all(50, 34, [&](Gen& g, int c) {
    CAPTURE(c);
    const double x = g.uniform(0, 1);
    StripInterpolant::trig_weights(n, 1.0, x, w.data());
    double v = 0;
    for (int j = 0; j < n; ++j) v += w[j] * std::sin(k * j / n);
    CHECK(v == doctest::Approx(std::sin(k * x)).epsilon(1e-12).scale(1.0));
  });
}

TEST_CASE("strip interpolant reproduces nodes and smooth s-profiles") {
  PeriodCell cell;
  auto grid = Grid::strip(-4.0, 4.0, 0.125, cell, {4, 4});
  auto fn = [](std::span<const double> x) {
    return std::tanh(x[0]) * (1.0 + 0.1 * std::sin(2 * std::numbers::pi * x[1]));
  };
  Field f = sample(grid, fn);
  StripInterpolant sp(f);
  std::vector<double> x(3);
  for (std::size_t i = 0; i < grid->size(); i += 7) {
    grid->coords(i, x);
    CHECK(sp(x) == doctest::Approx(f.values[i]).epsilon(1e-12).scale(1.0));
  }
  for_all(100, 35, [&](Gen& g, int c) {
    CAPTURE(c);
    std::vector<double> y{g.uniform(-3.5, 3.5), g.uniform(0, 1), g.uniform(0, 1)};
    double d0 = 0;
    const double v = sp.eval_d0(y, d0);
    CHECK(v == doctest::Approx(fn(y)).epsilon(1e-6).scale(1.0));
    const double exact_d0 = (1.0 - std::tanh(y[0]) * std::tanh(y[0])) * (1.0 + 0.1 * std::sin(2 * std::numbers::pi * y[1]));
    CHECK(d0 == doctest::Approx(exact_d0).epsilon(1e-5).scale(1.0));
  });
}

TEST_CASE("cardinal spline weights sum to one and reproduce linear data") {
  CardinalSpline sp({0.0, 0.3, 0.5, 1.1, 1.6, 2.0});
  for_all(200, 36, [&](Gen& g, int c) {
    CAPTURE(c);
    const double a = g.uniform(0.0, 2.0);
    const auto w = sp.weights(a);
    double s = 0, lin = 0;
    for (std::size_t k = 0; k < w.size(); ++k) {
      s += w[k];
      lin += w[k] * (3.0 * sp.knots()[k] - 1.0);
    }
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(lin == doctest::Approx(3.0 * a - 1.0).epsilon(1e-12).scale(1.0));
  });
  const auto w = sp.weights(0.5);
  for (std::size_t k = 0; k < w.size(); ++k) CHECK(w[k] == doctest::Approx(k == 2 ? 1.0 : 0.0).scale(1.0));
  CHECK_THROWS_AS(sp.weights(2.5), Error);
  CHECK_FALSE(sp.contains(-0.1));
}

TEST_CASE("block tridiagonal solve agrees with a dense solve") {
  for_all(10, 37, [](Gen& g, int c) {
    CAPTURE(c);
    const int m = g.integer(2, 6), n = g.integer(1, 5);
    BlockTridiag A;
    A.reset(m, n);
    for (int b = 0; b < m; ++b) {
      auto& D = A.diag(b);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) D(i, j) = g.uniform(-1, 1) + (i == j ? 4.0 * n : 0.0);
      for (int e = 0; e < n; ++e) {
        if (b > 0) A.add_lower(b, g.integer(0, n - 1), g.integer(0, n - 1), g.uniform(-1, 1));
        if (b + 1 < m) A.add_upper(b, g.integer(0, n - 1), g.integer(0, n - 1), g.uniform(-1, 1));
      }
    }
    const int size = m * n;
    Eigen::MatrixXd dense(size, size);
    for (int j = 0; j < size; ++j) dense.col(j) = A.multiply(Eigen::VectorXd::Unit(size, j));
    Eigen::MatrixXd B(size, 2);
    for (int i = 0; i < size; ++i) B(i, 0) = g.uniform(-1, 1), B(i, 1) = g.uniform(-1, 1);
    const Eigen::MatrixXd expected = dense.fullPivLu().solve(B);
    REQUIRE(A.factor());
    A.solve(B);
    CHECK((B - expected).cwiseAbs().maxCoeff() < 1e-11);
  });
}
