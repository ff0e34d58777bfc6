#include "pulsefront/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pulsefront/error.hpp"
#include "pulsefront/parallel.hpp"

namespace pulsefront {

const char* to_string(GridKind k) noexcept {
  switch (k) {
    case GridKind::torus: return "torus";
    case GridKind::strip: return "strip";
    case GridKind::box: return "box";
  }
  return "box";
}

const char* to_string(BoundaryPolicy p) noexcept {
  switch (p) {
    case BoundaryPolicy::none: return "none";
    case BoundaryPolicy::periodic: return "periodic";
    case BoundaryPolicy::dirichlet_from_field: return "dirichlet_from_field";
    case BoundaryPolicy::periodic_in_x: return "periodic_in_x";
  }
  return "none";
}

Grid::Grid(GridKind kind, std::vector<Axis> axes, BoundaryPolicy policy)
    : kind_(kind), axes_(std::move(axes)), policy_(policy) {
  require(!axes_.empty(), ErrorCode::invalid_argument, "grid needs at least one axis");
  strides_.assign(axes_.size(), 1);
  size_ = 1;
  for (int k = dim() - 1; k >= 0; --k) {
    const Axis& a = axes_[k];
    require(a.count >= 1 && std::isfinite(a.spacing) && a.spacing > 0.0 && std::isfinite(a.lo),
            ErrorCode::invalid_argument, "malformed grid axis");
    strides_[k] = size_;
    size_ *= static_cast<std::size_t>(a.count);
  }
}

GridPtr Grid::torus(const PeriodCell& cell, const std::vector<int>& points) {
  cell.validate();
  require(points.size() == cell.lengths.size(), ErrorCode::invalid_argument,
          "torus point counts must match the cell dimension");
  std::vector<Axis> axes;
  for (std::size_t k = 0; k < points.size(); ++k) {
    require(points[k] >= 1, ErrorCode::invalid_argument, "torus needs at least one point per axis");
    axes.push_back({0.0, cell.lengths[k] / points[k], points[k], true});
  }
  return std::make_shared<Grid>(GridKind::torus, std::move(axes), BoundaryPolicy::periodic);
}

GridPtr Grid::strip(double s_min, double s_max, double ds, const PeriodCell& cell,
                    const std::vector<int>& z_points) {
  require(s_min < 0.0 && s_max > 0.0 && ds > 0.0, ErrorCode::invalid_argument,
          "strip needs s_min < 0 < s_max and ds > 0");
  const int below = static_cast<int>(std::ceil(-s_min / ds - 1e-9));
  const int above = static_cast<int>(std::ceil(s_max / ds - 1e-9));
  std::vector<Axis> axes;
  axes.push_back({-below * ds, ds, below + above + 1, false});
  auto t = torus(cell, z_points);
  for (const auto& a : t->axes()) axes.push_back(a);
  return std::make_shared<Grid>(GridKind::strip, std::move(axes), BoundaryPolicy::dirichlet_from_field);
}

GridPtr Grid::box(const std::vector<double>& lo, const std::vector<double>& hi, const std::vector<int>& points,
                  BoundaryPolicy policy) {
  require(lo.size() == hi.size() && lo.size() == points.size() && !lo.empty(), ErrorCode::invalid_argument,
          "box bounds and point counts must have equal length");
  require(policy == BoundaryPolicy::dirichlet_from_field || policy == BoundaryPolicy::periodic_in_x,
          ErrorCode::boundary_policy, "box grids need dirichlet_from_field or periodic_in_x");
  std::vector<Axis> axes;
  for (std::size_t k = 0; k < lo.size(); ++k) {
    require(hi[k] > lo[k] && points[k] >= 2, ErrorCode::invalid_argument, "degenerate box axis");
    const bool per = policy == BoundaryPolicy::periodic_in_x && k == 0;
    const double h = per ? (hi[k] - lo[k]) / points[k] : (hi[k] - lo[k]) / (points[k] - 1);
    axes.push_back({lo[k], h, points[k], per});
  }
  return std::make_shared<Grid>(GridKind::box, std::move(axes), policy);
}

std::size_t Grid::index(std::span<const int> multi) const {
  std::size_t flat = 0;
  for (int k = 0; k < dim(); ++k) flat += strides_[k] * static_cast<std::size_t>(multi[k]);
  return flat;
}

void Grid::unravel(std::size_t flat, std::span<int> multi) const {
  for (int k = 0; k < dim(); ++k) {
    multi[k] = static_cast<int>(flat / strides_[k]);
    flat %= strides_[k];
  }
}

void Grid::coords(std::size_t flat, std::span<double> x) const {
  for (int k = 0; k < dim(); ++k) {
    const int i = static_cast<int>(flat / strides_[k]);
    flat %= strides_[k];
    x[k] = axes_[k].coord(i);
  }
}

bool Grid::is_boundary(std::size_t flat) const {
  for (int k = 0; k < dim(); ++k) {
    const int i = static_cast<int>(flat / strides_[k]);
    flat %= strides_[k];
    if (!axes_[k].periodic && (i == 0 || i == axes_[k].count - 1)) return true;
  }
  return false;
}

bool Grid::same_as(const Grid& other) const {
  return kind_ == other.kind_ && policy_ == other.policy_ && axes_ == other.axes_;
}

std::string Grid::describe() const {
  std::ostringstream os;
  os << to_string(kind_) << '[';
  for (int k = 0; k < dim(); ++k) {
    if (k) os << " x ";
    os << axes_[k].count << '@' << axes_[k].lo << ':' << axes_[k].hi() << (axes_[k].periodic ? "p" : "");
  }
  os << ']';
  return os.str();
}

Field::Field(GridPtr g, double fill, double t) : grid(std::move(g)), time(t) {
  require(grid != nullptr, ErrorCode::invalid_argument, "field without grid");
  values.assign(grid->size(), fill);
}

Field::Field(GridPtr g, std::vector<double> v, double t) : grid(std::move(g)), values(std::move(v)), time(t) {
  require(grid != nullptr, ErrorCode::invalid_argument, "field without grid");
  require(values.size() == grid->size(), ErrorCode::grid_mismatch, "value count does not match the grid");
}

void Field::check_finite(const std::string& where) const {
  for (double v : values)
    if (!std::isfinite(v)) fail(ErrorCode::nan_detected, "non-finite value in field (" + where + ")");
}

Field sample(GridPtr grid, const std::function<double(std::span<const double>)>& fn, double t) {
  Field out(grid, 0.0, t);
  const int d = grid->dim();
  parallel_for(grid->size(), [&](std::size_t begin, std::size_t end) {
    std::vector<double> x(d);
    for (std::size_t i = begin; i < end; ++i) {
      grid->coords(i, x);
      out.values[i] = fn(x);
    }
  });
  return out;
}

Field laplacian(const Field& f, const GhostFn& ghost) {
  const Grid& g = *f.grid;
  const int d = g.dim();
  bool needs_ghost = false;
  for (const auto& a : g.axes()) needs_ghost = needs_ghost || !a.periodic;
  require(!needs_ghost || static_cast<bool>(ghost), ErrorCode::boundary_policy,
          "laplacian on a grid with open axes needs a boundary field");
  Field out(f.grid, 0.0, f.time);
  parallel_for(g.size(), [&](std::size_t begin, std::size_t end) {
    std::vector<int> m(d);
    std::vector<double> x(d);
    for (std::size_t flat = begin; flat < end; ++flat) {
      g.unravel(flat, m);
      const double u0 = f.values[flat];
      double acc = 0.0;
      for (int k = 0; k < d; ++k) {
        const Axis& a = g.axis(k);
        const std::size_t st = g.stride(k);
        double lo, hi;
        if (a.periodic) {
          lo = f.values[m[k] == 0 ? flat + st * (a.count - 1) : flat - st];
          hi = f.values[m[k] == a.count - 1 ? flat - st * (a.count - 1) : flat + st];
        } else {
          if (m[k] == 0) {
            g.coords(flat, x);
            x[k] -= a.spacing;
            lo = ghost(x);
          } else {
            lo = f.values[flat - st];
          }
          if (m[k] == a.count - 1) {
            g.coords(flat, x);
            x[k] += a.spacing;
            hi = ghost(x);
          } else {
            hi = f.values[flat + st];
          }
        }
        acc += (lo - 2.0 * u0 + hi) / (a.spacing * a.spacing);
      }
      out.values[flat] = acc;
    }
  });
  return out;
}

double wrap_periodic(double x, double lo, double L) {
  double r = std::fmod(x - lo, L);
  if (r < 0.0) r += L;
  if (r >= L) r = 0.0;
  return lo + r;
}

double interpolate(const Field& f, std::span<const double> x) {
  const Grid& g = *f.grid;
  const int d = g.dim();
  require(static_cast<int>(x.size()) == d, ErrorCode::invalid_argument, "query point has wrong dimension");
  std::vector<int> i0(d), i1(d);
  std::vector<double> w(d);
  for (int k = 0; k < d; ++k) {
    const Axis& a = g.axis(k);
    require(std::isfinite(x[k]), ErrorCode::invalid_argument, "non-finite query point");
    if (a.periodic) {
      const double xr = wrap_periodic(x[k], a.lo, a.period());
      double t = (xr - a.lo) / a.spacing;
      int i = static_cast<int>(std::floor(t));
      if (i >= a.count) i = a.count - 1;
      i0[k] = i;
      i1[k] = (i + 1) % a.count;
      w[k] = std::clamp(t - i, 0.0, 1.0);
    } else {
      const double tol = 0.5 * a.spacing;
      require(x[k] >= a.lo - tol && x[k] <= a.hi() + tol, ErrorCode::out_of_range,
              "query point outside grid bounds on axis " + std::to_string(k));
      if (a.count == 1) {
        i0[k] = i1[k] = 0;
        w[k] = 0.0;
        continue;
      }
      const double t = std::clamp((x[k] - a.lo) / a.spacing, 0.0, static_cast<double>(a.count - 1));
      int i = std::min(static_cast<int>(std::floor(t)), a.count - 2);
      i0[k] = i;
      i1[k] = i + 1;
      w[k] = t - i;
    }
  }
  double acc = 0.0;
  const int corners = 1 << d;
  for (int c = 0; c < corners; ++c) {
    double wt = 1.0;
    std::size_t flat = 0;
    for (int k = 0; k < d; ++k) {
      const bool up = (c >> k) & 1;
      wt *= up ? w[k] : 1.0 - w[k];
      flat += g.stride(k) * static_cast<std::size_t>(up ? i1[k] : i0[k]);
    }
    if (wt != 0.0) acc += wt * f.values[flat];
  }
  return acc;
}

double sup_norm_diff(const Field& a, const Field& b) {
  require(a.grid && b.grid && a.grid->same_as(*b.grid), ErrorCode::grid_mismatch, "sup_norm_diff on different grids");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.values[i] - b.values[i]));
  return m;
}

double weighted_sup(const Field& a, const std::function<double(std::span<const double>)>& weight) {
  const Grid& g = *a.grid;
  std::vector<double> x(g.dim());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    g.coords(i, x);
    const double w = weight(x);
    require(w > 0.0, ErrorCode::invalid_argument, "weight must be positive");
    m = std::max(m, std::abs(a.values[i]) / w);
  }
  return m;
}

}  // namespace pulsefront
