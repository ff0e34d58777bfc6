#include <doctest.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "pulsefront/error.hpp"
#include "pulsefront/fieldio.hpp"
#include "pulsefront/grid.hpp"
#include "support.hpp"

using namespace pulsefront;
using testsupport::for_all;
using testsupport::Gen;

namespace {

GridPtr random_box(Gen& g) {
  const int dim = g.integer(1, 3);
  std::vector<double> lo, hi;
  std::vector<int> pts;
  for (int k = 0; k < dim; ++k) {
    lo.push_back(g.uniform(-3, 0));
    hi.push_back(lo.back() + g.uniform(0.5, 4));
    pts.push_back(g.integer(2, 9));
  }
  return Grid::box(lo, hi, pts, BoundaryPolicy::dirichlet_from_field);
}

}  // namespace

TEST_CASE("flat index and multi index are inverse") {
  for_all(50, 21, [](Gen& g, int c) {
    CAPTURE(c);
    auto grid = random_box(g);
    std::vector<int> m(grid->dim());
    for (std::size_t i = 0; i < grid->size(); ++i) {
      grid->unravel(i, m);
      CHECK(grid->index(m) == i);
    }
  });
}

TEST_CASE("box nodes include both ends and mark the boundary") {
  auto grid = Grid::box({0.0, -1.0}, {1.0, 1.0}, {5, 9}, BoundaryPolicy::dirichlet_from_field);
  CHECK(grid->size() == 45u);
  CHECK(grid->axis(0).spacing == doctest::Approx(0.25));
  CHECK(grid->axis(1).hi() == doctest::Approx(1.0));
  std::size_t boundary = 0;
  for (std::size_t i = 0; i < grid->size(); ++i) boundary += grid->is_boundary(i);
  CHECK(boundary == 45u - 3u * 7u);
}

TEST_CASE("strip grid has s = 0 as a node and periodic torus axes") {
  PeriodCell cell;
  auto grid = Grid::strip(-2.0, 3.0, 0.25, cell, {4, 4});
  CHECK(grid->axis(1).periodic);
  CHECK(grid->axis(2).periodic);
  CHECK_FALSE(grid->axis(0).periodic);
  bool zero = false;
  for (int i = 0; i < grid->axis(0).count; ++i) zero |= grid->axis(0).coord(i) == 0.0;
  CHECK(zero);
}

TEST_CASE("periodic Laplacian converges at second order") {
  PeriodCell cell;
  const double k = 2.0 * std::numbers::pi;
  auto err = [&](int n) {
    auto grid = Grid::torus(cell, {n, n});
    Field f = sample(grid, [&](std::span<const double> x) { return std::sin(k * x[0]) * std::cos(k * x[1]); });
    Field lap = laplacian(f);
    Field exact = sample(grid, [&](std::span<const double> x) { return -2 * k * k * std::sin(k * x[0]) * std::cos(k * x[1]); });
    return sup_norm_diff(lap, exact);
  };
  const double e1 = err(16), e2 = err(32);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.02));
}

TEST_CASE("the Laplacian of a quadratic is exact with ghost values on open axes") {
  auto grid = Grid::box({-1.0, -1.0}, {1.0, 1.0}, {9, 9}, BoundaryPolicy::dirichlet_from_field);
  auto q = [](std::span<const double> x) { return 3 * x[0] * x[0] - x[1] * x[1] + x[0] * x[1] + 2; };
  Field f = sample(grid, q);
  Field lap = laplacian(f, q);
  for (double v : lap.values) CHECK(v == doctest::Approx(4.0).epsilon(1e-10));
}

TEST_CASE("a Laplacian on open axes without ghost values is refused") {
  auto grid = Grid::box({-1.0}, {1.0}, {5}, BoundaryPolicy::dirichlet_from_field);
  Field f(grid, 1.0);
  CHECK_THROWS_AS(laplacian(f), Error);
}

TEST_CASE("multilinear interpolation reproduces multilinear functions") {
  auto grid = Grid::box({-1.0, 0.0}, {1.0, 2.0}, {7, 5}, BoundaryPolicy::dirichlet_from_field);
  auto fn = [](double x, double y) { return 1.5 - 2 * x + 0.5 * y + 3 * x * y; };
  Field f = sample(grid, [&](std::span<const double> z) { return fn(z[0], z[1]); });
  for_all(200, 22, [&](Gen& g, int c) {
    CAPTURE(c);
    std::vector<double> x{g.uniform(-1, 1), g.uniform(0, 2)};
    CHECK(interpolate(f, x) == doctest::Approx(fn(x[0], x[1])).epsilon(1e-12));
  });
}

TEST_CASE("interpolation wraps on periodic axes") {
  PeriodCell cell;
  auto grid = Grid::torus(cell, {8, 8});
  Gen g(23);
  Field f(grid, g.vec(grid->size(), 0, 1));
  for_all(100, 24, [&](Gen& gg, int c) {
    CAPTURE(c);
    std::vector<double> x{gg.uniform(0, 1), gg.uniform(0, 1)};
    std::vector<double> y{x[0] + gg.integer(-2, 2), x[1] + gg.integer(-2, 2)};
    CHECK(interpolate(f, y) == doctest::Approx(interpolate(f, x)).epsilon(1e-12));
  });
}

TEST_CASE("wrap_periodic lands in [lo, lo + L)") {
  for_all(500, 25, [](Gen& g, int c) {
    CAPTURE(c);
    const double lo = g.uniform(-2, 2), L = g.uniform(0.1, 3), x = g.uniform(-50, 50);
    const double w = wrap_periodic(x, lo, L);
    CHECK(w >= lo);
    CHECK(w < lo + L);
    const double k = (x - w) / L;
    CHECK(std::abs(k - std::round(k)) < 1e-9);
  });
}

TEST_CASE("weighted sup divides by the weight") {
  auto grid = Grid::box({0.0}, {1.0}, {3}, BoundaryPolicy::dirichlet_from_field);
  Field a(grid, std::vector<double>{1.0, -4.0, 2.0});
  CHECK(weighted_sup(a, [](std::span<const double>) { return 2.0; }) == doctest::Approx(2.0));
}

TEST_CASE("field dumps round-trip bit for bit") {
  const auto dir = testsupport::scratch_dir("fieldio");
  for_all(20, 26, [&](Gen& g, int c) {
    CAPTURE(c);
    auto grid = random_box(g);
    Field f(grid, g.vec(grid->size(), -1e3, 1e3), g.uniform(0, 10));
    const auto path = (dir / ("f" + std::to_string(c) + ".pfld")).string();
    write_field(path, f);
    Field r = read_field(path);
    CHECK(r.grid->same_as(*grid));
    CHECK(r.time == f.time);
    REQUIRE(r.values.size() == f.values.size());
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(r.values[i] == f.values[i]);
  });
}

TEST_CASE("dump header starts with the magic and is little-endian") {
  const auto dir = testsupport::scratch_dir("header");
  auto grid = Grid::box({0.0, 0.0}, {1.0, 2.0}, {3, 4}, BoundaryPolicy::dirichlet_from_field);
  Field f(grid, 0.5);
  const auto path = (dir / "h.pfld").string();
  write_field(path, f);
  std::ifstream in(path, std::ios::binary);
  char magic[4];
  unsigned char ver[4], dims[4];
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(ver), 4);
  in.read(reinterpret_cast<char*>(dims), 4);
  CHECK(std::string(magic, 4) == "PFLD");
  CHECK(ver[0] == kFieldVersion);
  CHECK(dims[0] == 2);
  CHECK(dims[1] == 0);
}

TEST_CASE("reading a file that is not a dump fails with an io error") {
  const auto dir = testsupport::scratch_dir("bad");
  const auto path = (dir / "bad.pfld").string();
  std::ofstream(path) << "not a field";
  try {
    read_field(path);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::io);
  }
  CHECK_THROWS_AS(read_field((dir / "missing.pfld").string()), Error);
}

TEST_CASE("sidecar JSON describes the dump") {
  const auto dir = testsupport::scratch_dir("sidecar");
  PeriodCell cell;
  auto grid = Grid::strip(-1.0, 1.0, 0.5, cell, {4, 4});
  Field f(grid, 0.25, 3.0);
  f.values[3] = 0.75;
  const auto path = (dir / "s.pfld").string();
  write_field_with_sidecar(path, f, R"({"speed": 0.6})");
  std::ifstream in(path + ".json");
  REQUIRE(in.good());
  auto j = nlohmann::json::parse(in);
  CHECK(j["format"] == "PFLD");
  CHECK(j["axes"].size() == 3);
  CHECK(j["time"].get<double>() == 3.0);
  CHECK(j["value_min"].get<double>() == 0.25);
  CHECK(j["value_max"].get<double>() == 0.75);
  CHECK(j["speed"].get<double>() == 0.6);
}

TEST_CASE("CSV slices parse back to the exact values") {
  const auto dir = testsupport::scratch_dir("csv");
  Gen g(27);
  auto grid = Grid::box({0.0, 0.0}, {1.0, 1.0}, {6, 5}, BoundaryPolicy::dirichlet_from_field);
  Field f(grid, g.vec(grid->size(), -1, 1));
  const auto path = (dir / "slice.csv").string();
  write_csv_slice(path, f, 1, {2, 0});
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);  // header
  int j = 0;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string xs, vs;
    std::getline(ss, xs, ',');
    std::getline(ss, vs, ',');
    const int idx[2] = {2, j};
    CHECK(std::strtod(xs.c_str(), nullptr) == doctest::Approx(grid->axis(1).coord(j)));
    CHECK(std::strtod(vs.c_str(), nullptr) == f.values[grid->index(idx)]);
    ++j;
  }
  CHECK(j == 5);
}
