#include "pulsefront/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>

#include "pulsefront/error.hpp"
#include "pulsefront/geometry.hpp"
#include "pulsefront/parallel.hpp"

namespace pulsefront {

const char* to_string(Frame f) noexcept { return f == Frame::lab ? "lab" : "comoving"; }

const char* to_string(BoundarySource b) noexcept {
  switch (b) {
    case BoundarySource::sub: return "sub";
    case BoundarySource::super: return "super";
    case BoundarySource::frozen_initial: return "frozen_initial";
  }
  return "unknown";
}

Frame frame_from_string(const std::string& s) {
  if (s == "lab") return Frame::lab;
  if (s == "comoving") return Frame::comoving;
  fail(ErrorCode::config, "unknown frame '" + s + "'");
}

BoundarySource boundary_source_from_string(const std::string& s) {
  if (s == "sub") return BoundarySource::sub;
  if (s == "super") return BoundarySource::super;
  if (s == "frozen_initial") return BoundarySource::frozen_initial;
  fail(ErrorCode::config, "unknown boundary source '" + s + "'");
}

double cfl_dt(const Nonlinearity& nl, const Grid& box, double advection) {
  double diag = 0.0;
  for (int k = 0; k < box.dim(); ++k) diag += 2.0 / (box.axis(k).spacing * box.axis(k).spacing);
  diag += std::abs(advection) / box.axis(box.dim() - 1).spacing;
  return 0.9 / (diag + nl.lipschitz());
}

// Stencil data for the nodes updated by the scheme.
struct StencilData {
  std::vector<std::size_t> nodes;
  std::vector<std::size_t> nbr;  // per node and axis: minus, plus
  std::vector<double> inv_h2;
  std::vector<std::uint8_t> boundary;
  int dim = 0;
};

namespace {

StencilData make_stencil(const Grid& g) {
  StencilData st;
  st.dim = g.dim();
  for (int k = 0; k < st.dim; ++k) st.inv_h2.push_back(1.0 / (g.axis(k).spacing * g.axis(k).spacing));
  st.boundary.assign(g.size(), 0);
  std::vector<int> idx(st.dim), nb(st.dim);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.is_boundary(i)) {
      st.boundary[i] = 1;
      continue;
    }
    st.nodes.push_back(i);
    g.unravel(i, idx);
    for (int k = 0; k < st.dim; ++k) {
      const Axis& a = g.axis(k);
      for (int sgn : {-1, 1}) {
        nb = idx;
        nb[k] += sgn;
        if (a.periodic) nb[k] = (nb[k] + a.count) % a.count;
        st.nbr.push_back(g.index(nb));
      }
    }
  }
  return st;
}

// One Euler sweep over the updated nodes. `adv` is chat / h_y for the comoving frame.
void sweep(const StencilData& st, const Nonlinearity& nl, const double* u, double* out, const double* amp, double dt,
           double adv, std::size_t ystride, double upper, std::size_t& clamped) {
  std::size_t clamp_total = 0;
  parallel_for(st.nodes.size(), [&](std::size_t b, std::size_t e) {
    std::size_t local = 0;
    for (std::size_t n = b; n < e; ++n) {
      const std::size_t i = st.nodes[n];
      const std::size_t* nb = &st.nbr[n * 2 * st.dim];
      const double ui = u[i];
      double lap = 0.0;
      for (int k = 0; k < st.dim; ++k) lap += (u[nb[2 * k]] + u[nb[2 * k + 1]] - 2.0 * ui) * st.inv_h2[k];
      double rhs = lap + nl.f_at(amp[i], ui);
      if (adv != 0.0) rhs += adv * (u[i + ystride] - ui);
      double v = ui + dt * rhs;
      if (v < 0.0 || v > upper) {
        v = std::clamp(v, 0.0, upper);
        ++local;
      }
      out[i] = v;
    }
    if (local) {
      static std::mutex mu;
      std::lock_guard<std::mutex> lock(mu);
      clamp_total += local;
    }
  });
  clamped += clamp_total;
}

double clamp_upper(const Nonlinearity& nl, double gamma) { return 1.0 + (gamma < 0.0 ? nl.gamma_star() : gamma); }

std::vector<double> amplitudes(const Grid& g, const Nonlinearity& nl, double y_shift) {
  std::vector<double> a(g.size());
  std::vector<double> z(g.dim());
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.coords(i, z);
    z.back() += y_shift;
    a[i] = nl.amplitude(z);
  }
  return a;
}

GridPtr shifted_grid(const Grid& g, double dy) {
  std::vector<double> lo, hi;
  std::vector<int> pts;
  for (const Axis& a : g.axes()) {
    lo.push_back(a.lo);
    hi.push_back(a.periodic ? a.lo + a.period() : a.hi());
    pts.push_back(a.count);
  }
  lo.back() += dy;
  hi.back() += dy;
  return Grid::box(lo, hi, pts, g.policy());
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

Field step(const Field& u, double t, const CauchyConfig& cfg, const Nonlinearity& nl, const FieldFn& boundary,
           StepStats* stats) {
  require(u.grid && cfg.box && u.grid->same_as(*cfg.box), ErrorCode::grid_mismatch, "field is not on the box");
  require(u.grid->dim() == nl.dim(), ErrorCode::invalid_argument, "box and medium dimensions differ");
  const double adv = cfg.frame == Frame::comoving ? cfg.chat : 0.0;
  const double limit = cfl_dt(nl, *u.grid, adv);
  const double dt = cfg.dt > 0.0 ? cfg.dt : limit;
  require(dt <= limit * (1.0 + 1e-12), ErrorCode::cfl_violation,
          "dt " + std::to_string(dt) + " exceeds the monotone limit " + std::to_string(limit));
  require(cfg.boundary_source == BoundarySource::frozen_initial || static_cast<bool>(boundary),
          ErrorCode::invalid_argument, "boundary source needs a field");

  const Grid& g = *u.grid;
  const StencilData st = make_stencil(g);
  const double yshift = cfg.frame == Frame::comoving ? cfg.chat * t : 0.0;
  const auto amp = amplitudes(g, nl, yshift);
  Field out = u;
  out.time = t + dt;
  StepStats local;
  const double upper = clamp_upper(nl, cfg.clamp_gamma);
  sweep(st, nl, u.values.data(), out.values.data(), amp.data(), dt, adv / g.axis(g.dim() - 1).spacing, g.stride(g.dim() - 1),
        upper, local.clamped_interior);
  if (cfg.boundary_source != BoundarySource::frozen_initial) {
    std::vector<double> z(g.dim());
    const double ynext = cfg.frame == Frame::comoving ? cfg.chat * (t + dt) : 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!st.boundary[i]) continue;
      g.coords(i, z);
      z.back() += ynext;
      double v = boundary(t + dt, z);
      if (v < 0.0 || v > upper) {
        v = std::clamp(v, 0.0, upper);
        ++local.clamped_boundary;
      }
      out.values[i] = v;
    }
  }
  if (stats) {
    stats->clamped_interior += local.clamped_interior;
    stats->clamped_boundary += local.clamped_boundary;
  }
  return out;
}

Trajectory solve_cauchy(const Field& u0, const CauchyConfig& cfg, const Nonlinearity& nl, const FieldFn& boundary,
                        const std::string& initial_id, const StepObserver& observer) {
  require(cfg.T_final > 0.0, ErrorCode::invalid_argument, "T_final must be positive");
  for (double v : u0.values)
    require(v >= 0.0 && v <= 1.0, ErrorCode::precondition, "initial data must lie in [0, 1]");
  const double adv = cfg.frame == Frame::comoving ? cfg.chat : 0.0;
  Trajectory tr;
  tr.cfl = cfl_dt(nl, *u0.grid, adv);
  const double dt_max = cfg.dt > 0.0 ? cfg.dt : tr.cfl;
  require(dt_max <= tr.cfl * (1.0 + 1e-12), ErrorCode::cfl_violation, "dt exceeds the monotone limit");
  const long n = std::max(1L, static_cast<long>(std::ceil(cfg.T_final / dt_max - 1e-9)));
  tr.dt = cfg.T_final / static_cast<double>(n);
  tr.initial_id = initial_id;
  tr.boundary_id = to_string(cfg.boundary_source);
  const long every = cfg.snapshot_every > 0.0 ? std::max(1L, std::lround(cfg.snapshot_every / tr.dt)) : n;

  CauchyConfig c = cfg;
  c.dt = tr.dt;
  const Grid& g = *u0.grid;
  const StencilData st = make_stencil(g);
  const double upper = clamp_upper(nl, cfg.clamp_gamma);
  std::vector<double> amp = amplitudes(g, nl, 0.0);
  std::vector<double> u = u0.values, next(u.size());
  std::vector<double> z(g.dim());
  Field cur(u0.grid, u, u0.time);
  tr.snapshots.push_back(cur);
  for (long k = 0; k < n; ++k) {
    const double t = u0.time + tr.dt * static_cast<double>(k);
    if (c.frame == Frame::comoving) amp = amplitudes(g, nl, c.chat * (t - u0.time));
    next = u;
    sweep(st, nl, u.data(), next.data(), amp.data(), tr.dt, adv / g.axis(g.dim() - 1).spacing, g.stride(g.dim() - 1), upper,
          tr.clamps.clamped_interior);
    if (c.boundary_source != BoundarySource::frozen_initial) {
      const double yshift = c.frame == Frame::comoving ? c.chat * (t + tr.dt - u0.time) : 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (!st.boundary[i]) continue;
        g.coords(i, z);
        z.back() += yshift;
        double v = boundary(t + tr.dt, z);
        if (v < 0.0 || v > upper) {
          v = std::clamp(v, 0.0, upper);
          ++tr.clamps.clamped_boundary;
        }
        next[i] = v;
      }
    }
    u.swap(next);
    ++tr.steps;
    const bool snap = (k + 1) % every == 0 || k + 1 == n;
    bool finite = true;
    if (snap) {
      for (double v : u) finite = finite && std::isfinite(v);
      if (!finite) fail(ErrorCode::nan_detected, "non-finite state at t = " + std::to_string(t + tr.dt));
      Field f(u0.grid, u, t + tr.dt);
      tr.deltas.push_back(max_abs_diff(f.values, tr.snapshots.back().values));
      tr.snapshots.push_back(std::move(f));
    }
    if (observer) {
      Field f(u0.grid, u, t + tr.dt);
      if (!observer(f, tr.steps)) break;
    }
  }
  return tr;
}

TrackedWindow::TrackedWindow(const Nonlinearity& nl, double chat, const WindowSpec& spec)
    : spec_(spec), chat_(chat) {
  require(chat > 0.0, ErrorCode::invalid_argument, "tracking needs a positive speed");
  require(spec.h > 0.0 && spec.half_width > 0.0 && spec.below > 0.0 && spec.above > 0.0, ErrorCode::invalid_argument,
          "window sizes must be positive");
  const int N = nl.dim();
  cell_ = nl.cell().lengths.back();
  auto cells = [&](double len, const char* what) {
    const double r = len / spec.h;
    require(std::abs(r - std::round(r)) < 1e-9, ErrorCode::invalid_argument,
            std::string("window ") + what + " must be a multiple of the spacing");
    return static_cast<int>(std::lround(r));
  };
  rows_ = cells(cell_, "cell height");
  const int nx = 2 * cells(spec.half_width, "half width") + 1;
  const int ny = cells(spec.below, "depth") + cells(spec.above, "height") + 1;
  require(ny > rows_ + 2, ErrorCode::invalid_argument, "window shorter than one cell");
  std::vector<double> lo(N, -spec.half_width), hi(N, spec.half_width);
  std::vector<int> pts(N, nx);
  lo.back() = -spec.below;
  hi.back() = spec.above;
  pts.back() = ny;
  base_ = Grid::box(lo, hi, pts, BoundaryPolicy::dirichlet_from_field);
  period_ = cell_ / chat;
  cfl_ = cfl_dt(nl, *base_);
  m_ = static_cast<int>(std::ceil(period_ / cfl_ - 1e-12));
  dt_ = period_ / m_;
}

GridPtr TrackedWindow::grid(long step) const {
  const long w = offset(step);
  return w == 0 ? base_ : shifted_grid(*base_, cell_ * static_cast<double>(w));
}

long TrackedWindow::offset(long step) const {
  require(step >= 0, ErrorCode::invalid_argument, "negative step");
  return step / m_;
}

TrackedRun::TrackedRun(std::shared_ptr<const TrackedWindow> window, const Nonlinearity& nl, const FieldFn& boundary,
                       double clamp_gamma)
    : window_(std::move(window)), nl_(&nl) {
  require(window_ != nullptr && static_cast<bool>(boundary), ErrorCode::invalid_argument,
          "tracked run needs a window and boundary data");
  const Grid& g = *window_->base();
  require(g.dim() == nl.dim(), ErrorCode::invalid_argument, "window and medium dimensions differ");
  amp_ = amplitudes(g, nl, 0.0);
  stencil_ = std::make_shared<const StencilData>(make_stencil(g));
  upper_ = clamp_upper(nl, clamp_gamma);
  is_boundary_.assign(g.size(), 0);
  for (std::size_t i = 0; i < g.size(); ++i)
    if (g.is_boundary(i)) {
      is_boundary_[i] = 1;
      boundary_nodes_.push_back(i);
    }
  const int m = window_->steps_per_period();
  phase_values_.assign(m, std::vector<double>(boundary_nodes_.size()));
  parallel_for(static_cast<std::size_t>(m), [&](std::size_t b, std::size_t e) {
    std::vector<double> z(g.dim());
    for (std::size_t p = b; p < e; ++p) {
      const double t = window_->time(static_cast<long>(p));
      for (std::size_t n = 0; n < boundary_nodes_.size(); ++n) {
        g.coords(boundary_nodes_[n], z);
        phase_values_[p][n] = std::clamp(boundary(t, z), 0.0, upper_);
      }
    }
  });
  const int ny = g.axis(g.dim() - 1).count, R = window_->shift_rows();
  const std::size_t cols = g.size() / static_cast<std::size_t>(ny);
  fill_.resize(cols * R);
  std::vector<double> z(g.dim());
  for (std::size_t c = 0; c < cols; ++c)
    for (int r = 0; r < R; ++r) {
      g.coords(c * ny + (ny - R + r), z);
      fill_[c * R + r] = std::clamp(boundary(0.0, z), 0.0, upper_);
    }
}

std::vector<double> TrackedRun::initial(const FieldFn& f) const {
  const Grid& g = *window_->base();
  std::vector<double> u(g.size());
  std::vector<double> z(g.dim());
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.coords(i, z);
    u[i] = f(0.0, z);
  }
  impose(u, 0);
  return u;
}

void TrackedRun::impose(std::vector<double>& u, long k) const {
  const auto& vals = phase_values_[static_cast<std::size_t>(k % window_->steps_per_period())];
  for (std::size_t n = 0; n < boundary_nodes_.size(); ++n) u[boundary_nodes_[n]] = vals[n];
}

void TrackedRun::advance(std::vector<double>& u, long k, std::vector<double>& scratch, StepStats& stats) const {
  const Grid& g = *window_->base();
  scratch = u;
  sweep(*stencil_, *nl_, u.data(), scratch.data(), amp_.data(), window_->dt(), 0.0, 1, upper_, stats.clamped_interior);
  if ((k + 1) % window_->steps_per_period() == 0) {
    const int ny = g.axis(g.dim() - 1).count, R = window_->shift_rows();
    const std::size_t cols = g.size() / static_cast<std::size_t>(ny);
    for (std::size_t c = 0; c < cols; ++c) {
      double* col = scratch.data() + c * ny;
      std::copy(col + R, col + ny, col);
      std::copy(fill_.begin() + static_cast<std::ptrdiff_t>(c * R), fill_.begin() + static_cast<std::ptrdiff_t>((c + 1) * R),
                col + (ny - R));
    }
  }
  impose(scratch, k + 1);
  u.swap(scratch);
}

Field TrackedRun::field(const std::vector<double>& u, long k) const { return Field(window_->grid(k), u, window_->time(k)); }

Field PeriodicFront::at_step(long k) const {
  require(window && !phases.empty(), ErrorCode::precondition, "empty periodic front");
  const int m = window->steps_per_period();
  return Field(window->grid(k), phases[static_cast<std::size_t>(k % m)], window->time(k));
}

namespace {

double window_interp(const PeriodicFront& v, long k, std::span<const double> z) {
  const Grid& g = *v.window->base();
  const int d = g.dim();
  const auto& vals = v.phases[static_cast<std::size_t>(k % v.window->steps_per_period())];
  const double yshift = v.window->cell() * static_cast<double>(v.window->offset(k));
  int i0[4];
  double w[4];
  for (int a = 0; a < d; ++a) {
    const Axis& ax = g.axis(a);
    const double x = z[a] - (a == d - 1 ? yshift : 0.0);
    require(x >= ax.lo - 0.5 * ax.spacing && x <= ax.hi() + 0.5 * ax.spacing, ErrorCode::out_of_range,
            "point outside the curved-front window");
    const double t = std::clamp((x - ax.lo) / ax.spacing, 0.0, static_cast<double>(ax.count - 1));
    i0[a] = std::min(static_cast<int>(std::floor(t)), ax.count - 2);
    w[a] = t - i0[a];
  }
  double acc = 0.0;
  for (int corner = 0; corner < (1 << d); ++corner) {
    double wt = 1.0;
    std::size_t flat = 0;
    for (int a = 0; a < d; ++a) {
      const int bit = (corner >> a) & 1;
      wt *= bit ? w[a] : 1.0 - w[a];
      flat += g.stride(a) * static_cast<std::size_t>(i0[a] + bit);
    }
    if (wt != 0.0) acc += wt * vals[flat];
  }
  return acc;
}

}  // namespace

double PeriodicFront::value(double t, std::span<const double> z) const {
  require(window && !phases.empty(), ErrorCode::precondition, "empty periodic front");
  require(t >= 0.0, ErrorCode::out_of_range, "periodic front is stored for t >= 0");
  const double r = t / window->dt();
  const long k = static_cast<long>(std::floor(r));
  const double w = r - static_cast<double>(k);
  const double a = window_interp(*this, k, z);
  if (w < 1e-12) return a;
  return (1.0 - w) * a + w * window_interp(*this, k + 1, z);
}

FieldFn PeriodicFront::as_field_fn() const {
  auto self = std::make_shared<PeriodicFront>(*this);
  return [self](double t, std::span<const double> z) { return self->value(t, z); };
}

namespace {

// 1 where a node is at least `margin` away from every face of the box.
std::vector<std::uint8_t> edge_mask(const Grid& g, double margin) {
  std::vector<std::uint8_t> mask(g.size(), 0);
  std::vector<double> z(g.dim());
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.is_boundary(i)) continue;
    g.coords(i, z);
    bool inside = true;
    for (int k = 0; k < g.dim(); ++k) {
      const Axis& a = g.axis(k);
      if (!a.periodic && (z[k] - a.lo < margin - 1e-12 || a.hi() - z[k] < margin - 1e-12)) inside = false;
    }
    mask[i] = inside;
  }
  return mask;
}

std::vector<double> sample_base(const Grid& g, const FieldFn& f, double t) {
  std::vector<double> v(g.size());
  parallel_for(g.size(), [&](std::size_t b, std::size_t e) {
    std::vector<double> z(g.dim());
    for (std::size_t i = b; i < e; ++i) {
      g.coords(i, z);
      v[i] = f(t, z);
    }
  });
  return v;
}

}  // namespace

CurvedFront build_curved_front(std::shared_ptr<const FrontLibrary> lib, const Nonlinearity& nl,
                               const AnsatzParams* super, const CurvedFrontOptions& opts, const FieldFn& init,
                               const std::string& init_id) {
  require(lib != nullptr, ErrorCode::invalid_argument, "curved front needs a front library");
  require(opts.conv_tol > 0.0 && opts.T_max > 0.0, ErrorCode::invalid_argument, "tolerances must be positive");
  const FrontLibrary& L = *lib;
  FieldFn sub = [lib](double t, std::span<const double> z) { return eval_sub(*lib, t, z); };
  FieldFn sup;
  if (super) {
    const AnsatzParams p = *super;
    sup = [lib, p](double t, std::span<const double> z) { return eval_super(*lib, p, t, z); };
  }
  FieldFn boundary;
  switch (opts.boundary) {
    case BoundarySource::sub: boundary = sub; break;
    case BoundarySource::super:
      require(static_cast<bool>(sup), ErrorCode::invalid_argument, "super boundary needs supersolution parameters");
      boundary = sup;
      break;
    default: fail(ErrorCode::invalid_argument, "curved fronts need sub or super boundary data");
  }

  auto window = std::make_shared<const TrackedWindow>(nl, L.fan.chat, opts.window);
  TrackedRun run(window, nl, boundary, opts.clamp_gamma);
  const Grid& g = *window->base();
  const int m = window->steps_per_period();

  CurvedFront out;
  out.boundary_id = to_string(opts.boundary);
  out.trajectory.initial_id = init_id;
  out.trajectory.boundary_id = out.boundary_id;
  out.trajectory.dt = window->dt();
  out.trajectory.cfl = window->cfl();

  std::vector<double> u = sample_base(g, init ? init : sub, 0.0), scratch, prev;
  for (double v : u)
    require(v >= 0.0 && v <= 1.0 + 1e-12, ErrorCode::precondition, "initial data must lie in [0, 1]");
  run.impose(u, 0);
  const std::vector<double> sub0 = sample_base(g, sub, 0.0);
  const std::vector<double> sup0 = opts.check_sandwich && sup ? sample_base(g, sup, 0.0) : std::vector<double>{};
  out.sandwich_low = std::numeric_limits<double>::infinity();
  out.sandwich_high = -std::numeric_limits<double>::infinity();
  auto sandwich = [&](const std::vector<double>& v) {
    if (!opts.check_sandwich) return;
    for (std::size_t i = 0; i < v.size(); ++i) {
      out.sandwich_low = std::min(out.sandwich_low, v[i] - sub0[i]);
      if (!sup0.empty()) out.sandwich_high = std::max(out.sandwich_high, v[i] - sup0[i]);
    }
  };
  sandwich(u);
  out.trajectory.snapshots.push_back(run.field(u, 0));

  const long max_periods = std::max(1L, static_cast<long>(std::ceil(opts.T_max / window->period())));
  long k = 0;
  for (long j = 1; j <= max_periods; ++j) {
    prev = u;
    for (int s = 0; s < m; ++s, ++k) run.advance(u, k, scratch, out.clamps);
    for (double v : u)
      if (!std::isfinite(v)) fail(ErrorCode::nan_detected, "non-finite state during curved-front construction");
    out.final_delta = max_abs_diff(u, prev);
    out.period_deltas.push_back(out.final_delta);
    sandwich(u);
    if (j % std::max(1, opts.snapshot_periods) == 0) {
      out.trajectory.snapshots.push_back(run.field(u, k));
      out.trajectory.deltas.push_back(out.final_delta);
    }
    if (out.final_delta < opts.conv_tol) {
      out.converged = true;
      break;
    }
  }

  // One more period, stored as V_hat.
  PeriodicFront& vh = out.vhat;
  vh.window = window;
  vh.phases.assign(m, {});
  const long k0 = k;
  for (int s = 0; s < m; ++s, ++k) {
    vh.phases[static_cast<std::size_t>(k % m)] = u;
    run.advance(u, k, scratch, out.clamps);
  }
  out.identity_residual = max_abs_diff(u, vh.phases[static_cast<std::size_t>(k % m)]);
  sandwich(u);

  // Time increments of V_hat over the stored period.
  const int ny = g.axis(g.dim() - 1).count, R = window->shift_rows();
  const std::vector<std::uint8_t> core = edge_mask(g, opts.core_margin);
  double min_inc = std::numeric_limits<double>::infinity();
  for (long s = k0; s < k; ++s) {
    const auto& a = vh.phases[static_cast<std::size_t>(s % m)];
    const bool wrap = (s + 1) % m == 0;
    const auto& b = wrap ? u : vh.phases[static_cast<std::size_t>((s + 1) % m)];
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (!core[i]) continue;
      std::size_t jn = i;
      if (wrap) {
        const int row = static_cast<int>(i % ny);
        if (row < R + 1) continue;
        jn = i - R;
        if (!core[jn]) continue;
      }
      if (a[i] <= 1e-9 || a[i] >= 1.0 - 1e-9) continue;
      min_inc = std::min(min_inc, b[jn] - a[i]);
    }
  }
  out.min_time_increment = min_inc;
  out.steps = k;
  out.trajectory.steps = k;
  out.trajectory.clamps = out.clamps;
  return out;
}

std::vector<double> bracket_gap(const PeriodicFront& a, const PeriodicFront& b) {
  require(a.window && b.window && a.window->base()->same_as(*b.window->base()) &&
              a.window->steps_per_period() == b.window->steps_per_period(),
          ErrorCode::grid_mismatch, "bracket runs use different windows");
  std::vector<double> gap(a.phases[0].size());
  for (std::size_t i = 0; i < gap.size(); ++i) gap[i] = std::abs(a.phases[0][i] - b.phases[0][i]);
  return gap;
}

ConvergenceReport measure_gap_decay(const Field& v, double t, const FrontLibrary& lib, double v_star,
                                           const std::vector<std::uint8_t>* trust, double bin_width, double far_tol,
                                           double edge_margin) {
  require(v.grid && v.grid->dim() == 2, ErrorCode::invalid_argument, "gap bins are implemented for N = 2");
  require(bin_width > 0.0 && v_star >= 0.0, ErrorCode::invalid_argument, "bin width and rate must be positive");
  require(!trust || trust->size() == v.size(), ErrorCode::grid_mismatch, "trust mask has the wrong size");
  const Grid& g = *v.grid;
  const double vertex_y = lib.fan.chat * t;
  ConvergenceReport r;
  r.v_star = v_star;
  GapBins& B = r.bins;
  std::vector<double> z(2);
  const std::vector<std::uint8_t> core = edge_mask(g, edge_margin);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if ((trust && !(*trust)[i]) || !core[i]) continue;
    g.coords(i, z);
    const double d = std::hypot(z[0], z[1] - vertex_y);
    const double m = facet_coordinate(lib.fan, t, z);
    const double weight = std::min(1.0, std::exp(-v_star * m));
    const double gap = std::abs(v[i] - eval_sub(lib, t, z)) / weight;
    const std::size_t bin = static_cast<std::size_t>(std::floor(d / bin_width));
    if (bin >= B.max_gap.size()) {
      B.max_gap.resize(bin + 1, 0.0);
      B.count.resize(bin + 1, 0);
    }
    B.max_gap[bin] = std::max(B.max_gap[bin], gap);
    ++B.count[bin];
  }
  for (std::size_t b = 0; b < B.max_gap.size(); ++b) {
    B.lo.push_back(bin_width * b);
    B.hi.push_back(bin_width * (b + 1));
  }
  std::vector<double> filled;
  for (std::size_t b = 0; b < B.max_gap.size(); ++b)
    if (B.count[b]) filled.push_back(B.max_gap[b]);
  ExperimentReport& rep = r.report;
  rep.id = "gap_decay";
  const std::string where = "evolution.measure_gap_decay on " + g.describe();
  if (filled.empty()) {
    rep.add_flag("bins_nonempty", false, Provenance::measured, where);
    return r;
  }
  const std::size_t peak = static_cast<std::size_t>(std::max_element(filled.begin(), filled.end()) - filled.begin());
  std::size_t rises = 0;
  for (std::size_t b = peak + 1; b < filled.size(); ++b)
    if (filled[b] > filled[b - 1] * (1.0 + 1e-9) + 1e-15) ++rises;
  rep.add("bins_before_peak", static_cast<double>(peak), ">=", 0.0, Provenance::measured, where);
  rep.add("bin_maxima_increases_after_peak", static_cast<double>(rises), "==", 0.0, Provenance::paper_formula, where);
  rep.add("farthest_bin_max", filled.back(), "<", far_tol, Provenance::paper_formula, where);
  rep.add("farthest_minus_nearest", filled.back() - filled.front(), "<", 0.0, Provenance::paper_formula, where);
  return r;
}

StabilityResult run_stability(const PeriodicFront& vhat, std::shared_ptr<const FrontLibrary> lib,
                              const Nonlinearity& nl, const std::vector<double>& u0, const StabilityOptions& opts,
                              const std::string& id) {
  require(vhat.window && lib, ErrorCode::invalid_argument, "stability run needs V_hat and fronts");
  const TrackedWindow& W = *vhat.window;
  const Grid& g = *W.base();
  require(u0.size() == g.size(), ErrorCode::grid_mismatch, "initial data is not on the curved-front window");
  StabilityResult res;
  ExperimentReport& rep = res.report;
  rep.id = "stability:" + id;
  const std::string where = "evolution.run_stability on " + g.describe();

  FieldFn sub = [lib](double t, std::span<const double> z) { return eval_sub(*lib, t, z); };
  const std::vector<double> sub0 = sample_base(g, sub, 0.0);
  res.min_initial_gap = std::numeric_limits<double>::infinity();
  double lo = 0.0, hi = 1.0;
  for (std::size_t i = 0; i < u0.size(); ++i) {
    res.min_initial_gap = std::min(res.min_initial_gap, u0[i] - sub0[i]);
    lo = std::min(lo, u0[i]);
    hi = std::max(hi, u0[i]);
  }
  // Decay condition: the weighted quotient in the band next to the window boundary.
  const auto& ax = g.axis(0);
  const auto& ay = g.axis(1);
  std::vector<double> z(g.dim());
  res.decay_quotient = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.coords(i, z);
    const double edge = std::min({z[0] - ax.lo, ax.hi() - z[0], z[1] - ay.lo, ay.hi() - z[1]});
    if (edge > opts.outer_band) continue;
    const double m = facet_coordinate(lib->fan, 0.0, z);
    const double weight = std::min(1.0, std::exp(-opts.v * m));
    res.decay_quotient = std::max(res.decay_quotient, std::abs(u0[i] - sub0[i]) / weight);
  }
  const bool ordered = res.min_initial_gap >= 0.0;
  const bool ranged = lo >= 0.0 && hi <= 1.0;
  const bool decays = res.decay_quotient <= opts.decay_tol;
  res.accepted = ordered && ranged && decays;
  if (!res.accepted) {
    rep.add_skipped(std::string("rejected: ") + (!ordered ? "u0 below V_sub(0)" : !ranged ? "u0 outside [0,1]"
                                                                                    : "decay condition fails"),
                    Provenance::trivial, where);
    return res;
  }
  rep.add("min_u0_minus_sub", res.min_initial_gap, ">=", 0.0, Provenance::trivial, where);
  rep.add("decay_quotient_outer_band", res.decay_quotient, "<=", opts.decay_tol, Provenance::measured, where);

  TrackedRun run(vhat.window, nl, sub);
  std::vector<double> u = u0, scratch;
  run.impose(u, 0);
  const int m = W.steps_per_period();
  const long every = static_cast<long>(std::max(1, opts.record_periods)) * m;
  const long total = std::max(every, static_cast<long>(std::ceil(opts.T_final / W.period())) * m);
  auto record = [&](long k) {
    const auto& v = vhat.phases[static_cast<std::size_t>(k % m)];
    res.times.push_back(W.time(k));
    res.errors.push_back(max_abs_diff(u, v));
    if (opts.check_envelope) {
      const GridPtr gk = W.grid(k);
      const double t = W.time(k);
      double excess = -std::numeric_limits<double>::infinity();
      std::vector<double> zz(gk->dim());
      for (std::size_t i = 0; i < u.size(); ++i) {
        gk->coords(i, zz);
        excess = std::max(excess, u[i] - eval_envelope(*lib, AnsatzKind::w_plus, opts.envelope, {}, t, zz));
      }
      res.envelope_excess.push_back(excess);
    }
  };
  StepStats stats;
  record(0);
  for (long k = 0; k < total; ++k) {
    run.advance(u, k, scratch, stats);
    if ((k + 1) % every == 0) record(k + 1);
  }
  long from = static_cast<long>(res.errors.size()) - 1;
  while (from > 0 && res.errors[from] <= res.errors[from - 1] * (1.0 + 1e-9) + 1e-15) --from;
  res.eventually_decreasing_from = from;
  const double half = 0.5 * static_cast<double>(res.errors.size() - 1);
  rep.add("decreasing_from_record", static_cast<double>(from), "<=", half, Provenance::paper_formula, where);
  rep.add("final_distance_to_vhat", res.errors.back(), "<", opts.stab_tol, Provenance::paper_formula, where);
  rep.add("interior_clamps", static_cast<double>(stats.clamped_interior), "==", 0.0, Provenance::trivial, where);
  if (opts.check_envelope) {
    const double worst = *std::max_element(res.envelope_excess.begin(), res.envelope_excess.end());
    rep.add("max_u_minus_w_plus", worst, "<=", opts.envelope_tol, Provenance::paper_formula, where);
  }
  return res;
}

}  // namespace pulsefront
