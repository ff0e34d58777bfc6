#include "pulsefront/fronts.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "pulsefront/error.hpp"
#include "pulsefront/parallel.hpp"

namespace pulsefront {

const char* to_string(AnsatzKind k) noexcept {
  switch (k) {
    case AnsatzKind::sub: return "sub";
    case AnsatzKind::super: return "super";
    case AnsatzKind::w_plus: return "w_plus";
    case AnsatzKind::v_plus: return "v_plus";
    case AnsatzKind::v_minus: return "v_minus";
  }
  return "sub";
}

double FrontLibrary::clamp_angle(double a) const {
  const double lo = angles.front(), hi = angles.back();
  require(a >= lo - 1e-9 && a <= hi + 1e-9, ErrorCode::out_of_range,
          "direction angle " + std::to_string(a) + " outside the solved lattice");
  return std::clamp(a, lo, hi);
}

double FrontLibrary::lattice_value(double a, double s, std::span<const double> z) const {
  const auto w = spline->weights(clamp_angle(a));
  double v = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k)
    if (std::abs(w[k]) > 1e-15) v += w[k] * evaluate_front(fronts[k], s, z);
  return v;
}

SpeedMap FrontLibrary::speed_map() const {
  SpeedMap m;
  m.angles = angles;
  for (const auto& f : fronts) m.speeds.push_back(f.c);
  m.kappa = *std::min_element(m.speeds.begin(), m.speeds.end());
  m.K = *std::max_element(m.speeds.begin(), m.speeds.end());
  for (std::size_t k = 1; k < m.speeds.size(); ++k)
    m.max_jump = std::max(m.max_jump, std::abs(m.speeds[k] - m.speeds[k - 1]));
  return m;
}

namespace {

std::vector<double> lattice_angles(const DirectionFan& fan, int intervals) {
  std::vector<double> fa;
  for (int i = 0; i < fan.n(); ++i) fa.push_back(fan.polar_angle(i));
  std::sort(fa.begin(), fa.end());
  std::vector<double> out{fa.front()};
  for (std::size_t k = 1; k < fa.size(); ++k)
    for (int j = 1; j <= intervals; ++j) out.push_back(j == intervals ? fa[k] : fa[k - 1] + (fa[k] - fa[k - 1]) * j / intervals);
  return out;
}

}  // namespace

FrontLibrary assemble_front_library(DirectionFan fan, std::vector<double> angles, std::vector<PulsatingFront> fronts,
                                    double epsilon_rho) {
  fan.validate();
  require(fan.dim() == 2, ErrorCode::precondition, "front libraries are built for planar fans");
  require(angles.size() == fronts.size() && angles.size() >= 2, ErrorCode::invalid_argument,
          "one front per lattice angle");
  FrontLibrary lib;
  lib.epsilon_rho = epsilon_rho;
  lib.angles = std::move(angles);
  for (auto& f : fronts) lib.fronts.push_back(renormalize(f, Normalization::weighted_l2, epsilon_rho).front);
  std::vector<double> c;
  for (int i = 0; i < fan.n(); ++i) {
    const double a = fan.polar_angle(i);
    int best = -1;
    for (std::size_t k = 0; k < lib.angles.size(); ++k)
      if (std::abs(lib.angles[k] - a) < 1e-12) best = static_cast<int>(k);
    require(best >= 0, ErrorCode::precondition, "fan direction is not a lattice node");
    lib.branch_index.push_back(best);
    c.push_back(lib.fronts[best].c);
  }
  fan.set_speeds(c);
  lib.fan = std::move(fan);
  lib.spline = std::make_shared<CardinalSpline>(lib.angles);
  lib.kappa = std::numeric_limits<double>::infinity();
  for (const auto& f : lib.fronts) lib.kappa = std::min(lib.kappa, f.c);
  lib.kappa2 = std::numeric_limits<double>::infinity();
  for (int i = 0; i < lib.fan.n(); ++i) lib.kappa2 = std::min(lib.kappa2, lib.branch(i).tail_kappa2);
  return lib;
}

FrontLibrary build_front_library(const Nonlinearity& nl, DirectionFan fan, const FrontLibraryOptions& opts) {
  fan.validate();
  require(fan.dim() == 2, ErrorCode::precondition, "front libraries are built for planar fans");
  require(opts.lattice_intervals >= 1, ErrorCode::invalid_argument, "lattice needs at least one interval");
  auto angles = lattice_angles(fan, opts.lattice_intervals);
  SpeedMap map = build_speed_map(nl, angles, opts.strip, opts.solver, true);
  const double eps = opts.epsilon_rho_factor * map.kappa;
  return assemble_front_library(std::move(fan), std::move(angles), std::move(map.fronts), eps);
}

double eval_sub(const FrontLibrary& lib, double t, std::span<const double> z, int* which) {
  double best = -std::numeric_limits<double>::infinity();
  int arg = 0;
  for (int i = 0; i < lib.fan.n(); ++i) {
    const auto e = lib.fan.direction(i);
    double s = -lib.fan.speeds[i] * t;
    for (std::size_t k = 0; k < e.size(); ++k) s += z[k] * e[k];
    const double v = evaluate_front(lib.branch(i), s, z);
    if (v > best) {
      best = v;
      arg = i;
    }
  }
  if (which) *which = arg;
  return best;
}

namespace {

struct SuperParts {
  double U = 0.0;     // U_{e(x)}(xi, z)
  double h = 0.0;     // h(alpha x)
  double corr = 0.0;  // U_i^beta(eta) omega(xi) + 1 - omega(xi)
};

SuperParts super_parts(const FrontLibrary& lib, const AnsatzParams& p, double t, std::span<const double> z,
                       bool need_U) {
  require(p.alpha > 0.0 && p.beta > 0.0 && p.beta <= 1.0, ErrorCode::invalid_argument,
          "super ansatz needs alpha > 0 and beta in (0,1]");
  require(p.branch >= 0 && p.branch < lib.fan.n(), ErrorCode::invalid_argument, "branch index out of range");
  const int d = lib.fan.xdim();
  double ax[8];
  for (int k = 0; k < d; ++k) ax[k] = p.alpha * z[k];
  const SurfaceEval S = solve_phi(lib.fan, std::span<const double>(ax, d));
  const FrameCoords fc = frame_coords(S, lib.fan.chat, p.alpha, t, z[d]);
  SuperParts out;
  out.h = S.h;
  if (need_U) {
    const double a = std::atan2(1.0, -S.grad[0]);
    out.U = lib.lattice_value(a, fc.xi, z);
  }
  const double ui = std::max(evaluate_front(lib.branch(p.branch), fc.eta, z), 0.0);
  const double w = omega(fc.xi).w;
  out.corr = std::pow(ui, p.beta) * w + (1.0 - w);
  return out;
}

}  // namespace

double eval_super(const FrontLibrary& lib, const AnsatzParams& p, double t, std::span<const double> z) {
  require(p.epsilon >= 0.0, ErrorCode::invalid_argument, "epsilon must be nonnegative");
  const SuperParts sp = super_parts(lib, p, t, z, true);
  return sp.U + p.epsilon * sp.h * sp.corr;
}

double correction_term(const FrontLibrary& lib, const AnsatzParams& p, double t, std::span<const double> z) {
  return super_parts(lib, p, t, z, false).corr;
}

double eval_envelope(const FrontLibrary& lib, AnsatzKind kind, const AnsatzParams& p, const FieldFn& base, double t,
                     std::span<const double> z) {
  require(p.delta >= 0.0 && p.lambda >= 0.0 && p.varrho >= 0.0, ErrorCode::invalid_argument,
          "envelope parameters must be nonnegative");
  const double decay = std::exp(-p.lambda * t);
  switch (kind) {
    case AnsatzKind::w_plus: {
      const double tau = p.T + t - p.varrho * p.delta * decay + p.varrho * p.delta;
      return eval_super(lib, p, tau, z) + p.delta * decay * correction_term(lib, p, tau, z);
    }
    case AnsatzKind::v_plus: {
      require(static_cast<bool>(base), ErrorCode::precondition, "envelope needs a base field");
      const double tau = p.T + t - p.varrho * p.delta * decay + p.varrho * p.delta;
      return base(tau, z) + p.delta * decay * correction_term(lib, p, tau, z);
    }
    case AnsatzKind::v_minus: {
      require(static_cast<bool>(base), ErrorCode::precondition, "envelope needs a base field");
      const double tau = p.T + t + p.varrho * p.delta * decay - p.varrho * p.delta;
      return base(tau, z) - p.delta * decay * correction_term(lib, p, tau, z);
    }
    default: fail(ErrorCode::invalid_argument, "not an envelope kind");
  }
}

Ansatz::Ansatz(AnsatzKind kind, std::shared_ptr<const FrontLibrary> lib, AnsatzParams params, FieldFn base)
    : kind_(kind), lib_(std::move(lib)), params_(params), base_(std::move(base)) {
  require(lib_ != nullptr, ErrorCode::invalid_argument, "ansatz without fronts");
  if (kind_ == AnsatzKind::v_plus || kind_ == AnsatzKind::v_minus)
    require(static_cast<bool>(base_), ErrorCode::precondition, "envelope needs a base field");
}

double Ansatz::operator()(double t, std::span<const double> z) const {
  switch (kind_) {
    case AnsatzKind::sub: return eval_sub(*lib_, t, z);
    case AnsatzKind::super: return eval_super(*lib_, params_, t, z);
    default: return eval_envelope(*lib_, kind_, params_, base_, t, z);
  }
}

GridPtr BoxSpec::grid() const {
  require(h > 0.0 && x_hi > x_lo && y_hi > y_lo, ErrorCode::invalid_argument, "degenerate verification box");
  const int nx = static_cast<int>(std::lround((x_hi - x_lo) / h)) + 1;
  const int ny = static_cast<int>(std::lround((y_hi - y_lo) / h)) + 1;
  require(std::abs((nx - 1) * h - (x_hi - x_lo)) < 1e-9 && std::abs((ny - 1) * h - (y_hi - y_lo)) < 1e-9,
          ErrorCode::invalid_argument, "box sides must be multiples of the spacing");
  return Grid::box({x_lo, y_lo}, {x_hi, y_hi}, {nx, ny}, BoundaryPolicy::dirichlet_from_field);
}

BoxSpec BoxSpec::refined() const {
  BoxSpec b = *this;
  b.h = h / 2;
  return b;
}

BoxSpec BoxSpec::shifted(double dy) const {
  BoxSpec b = *this;
  b.y_lo += dy;
  b.y_hi += dy;
  return b;
}

ResidualReport residual(const Ansatz& u, const Nonlinearity& nl, const GridPtr& box, double t, double dt) {
  require(box && box->dim() == 2, ErrorCode::invalid_argument, "residual sweeps need a planar box");
  require(dt > 0.0, ErrorCode::invalid_argument, "dt must be positive");
  const Axis ax = box->axis(0), ay = box->axis(1);
  const int nx = ax.count, ny = ay.count;
  const int ex = nx + 2, ey = ny + 2;
  const double hx = ax.spacing, hy = ay.spacing;
  const bool sub = u.kind() == AnsatzKind::sub;
  const FrontLibrary& lib = u.library();

  std::vector<double> val(static_cast<std::size_t>(ex) * ey), up(box->size()), dn(box->size());
  std::vector<int> br(sub ? val.size() : 0), brp(sub ? box->size() : 0), brm(sub ? box->size() : 0);
  parallel_for(static_cast<std::size_t>(ex), [&](std::size_t b, std::size_t e) {
    double z[2];
    for (std::size_t i = b; i < e; ++i)
      for (int j = 0; j < ey; ++j) {
        z[0] = ax.lo + (static_cast<int>(i) - 1) * hx;
        z[1] = ay.lo + (j - 1) * hy;
        const std::size_t k = i * ey + j;
        if (sub) val[k] = eval_sub(lib, t, z, &br[k]);
        else val[k] = u(t, z);
        const int ii = static_cast<int>(i) - 1, jj = j - 1;
        if (ii >= 0 && ii < nx && jj >= 0 && jj < ny) {
          const std::size_t f = static_cast<std::size_t>(ii) * ny + jj;
          if (sub) {
            up[f] = eval_sub(lib, t + dt, z, &brp[f]);
            dn[f] = eval_sub(lib, t - dt, z, &brm[f]);
          } else {
            up[f] = u(t + dt, z);
            dn[f] = u(t - dt, z);
          }
        }
      }
  });

  ResidualReport rep;
  rep.t = t;
  rep.grid = box->describe();
  rep.params = u.params();
  rep.values.assign(box->size(), std::numeric_limits<double>::quiet_NaN());
  rep.min_residual = std::numeric_limits<double>::infinity();
  rep.max_residual = -std::numeric_limits<double>::infinity();
  rep.argmin = {0.0, 0.0};
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) {
      const std::size_t f = static_cast<std::size_t>(i) * ny + j;
      const std::size_t k = static_cast<std::size_t>(i + 1) * ey + (j + 1);
      if (sub) {
        const int b0 = br[k];
        if (br[k - ey] != b0 || br[k + ey] != b0 || br[k - 1] != b0 || br[k + 1] != b0 || brp[f] != b0 ||
            brm[f] != b0) {
          ++rep.skipped;
          continue;
        }
      }
      const double c = val[k];
      const double lap = (val[k - ey] - 2.0 * c + val[k + ey]) / (hx * hx) + (val[k - 1] - 2.0 * c + val[k + 1]) / (hy * hy);
      const double z[2] = {ax.coord(i), ay.coord(j)};
      const double r = (up[f] - dn[f]) / (2.0 * dt) - lap - nl.f_at(nl.amplitude(z), c);
      rep.values[f] = r;
      ++rep.nodes;
      if (r < rep.min_residual) {
        rep.min_residual = r;
        rep.argmin = {z[0], z[1]};
      }
      rep.max_residual = std::max(rep.max_residual, r);
    }
  return rep;
}

Certificate certify(const Ansatz& u, const Nonlinearity& nl, const BoxSpec& box, double t, double dt) {
  Certificate c;
  const GridPtr g = box.grid();
  c.coarse = residual(u, nl, g, t, dt);
  c.fine = residual(u, nl, box.refined().grid(), t, dt);
  const ResidualReport half_dt = residual(u, nl, g, t, dt / 2);
  const int ny = g->axis(1).count, nyf = 2 * (ny - 1) + 1;
  double ds = 0.0, dtm = 0.0;
  for (int i = 0; i < g->axis(0).count; ++i)
    for (int j = 0; j < ny; ++j) {
      const std::size_t f = static_cast<std::size_t>(i) * ny + j;
      const double a = c.coarse.values[f];
      const double b = c.fine.values[static_cast<std::size_t>(2 * i) * nyf + 2 * j];
      if (std::isfinite(a) && std::isfinite(b)) ds = std::max(ds, std::abs(a - b));
      if (std::isfinite(a) && std::isfinite(half_dt.values[f])) dtm = std::max(dtm, std::abs(a - half_dt.values[f]));
    }
  c.tol_space = 4.0 / 3.0 * ds;
  c.tol_time = 4.0 / 3.0 * dtm;
  c.tol_disc = c.tol_space + c.tol_time;
  c.coarse.tol = c.tol_disc;
  c.fine.tol = 1.5 * (c.tol_space / 4.0 + c.tol_time);
  c.pass_coarse = c.coarse.min_residual >= -c.coarse.tol;
  c.pass_fine = c.fine.min_residual >= -c.fine.tol;
  return c;
}

BoxSpec super_box(const FrontLibrary& lib, const AnsatzParams& p, const ScanOptions& o, double t) {
  BoxSpec b;
  b.h = o.h;
  b.x_lo = -o.half_width;
  b.x_hi = o.half_width;
  double ymin = std::numeric_limits<double>::infinity(), ymax = -ymin;
  const int nx = static_cast<int>(std::lround(2 * o.half_width / o.h));
  for (int i = 0; i <= nx; ++i) {
    const double x = -o.half_width + i * o.h;
    const double xs[1] = {x};
    const double ax[1] = {p.alpha * x};
    ymin = std::min(ymin, psi(lib.fan, xs));
    ymax = std::max(ymax, solve_phi(lib.fan, ax).phi / p.alpha);
  }
  const double shift = lib.fan.chat * t;
  b.y_lo = std::floor((ymin - o.below + shift) / o.h) * o.h;
  b.y_hi = b.y_lo + std::ceil((ymax + o.above + shift - b.y_lo) / o.h) * o.h;
  return b;
}

ScanResult scan_supersolution(std::shared_ptr<const FrontLibrary> lib, const Nonlinearity& nl, const ScanOptions& o) {
  require(!o.betas.empty() && o.epsilon0 > 0.0 && o.alpha0 > 0.0 && o.alpha_factor > 0.0 && o.alpha_factor < 1.0,
          ErrorCode::invalid_argument, "malformed scan options");
  ScanResult out;
  const double period = lib->fan.chat > 0.0 ? nl.cell().lengths.back() / lib->fan.chat : 0.0;
  for (double beta : o.betas) {
    double eps = o.epsilon0;
    for (int le = 0; le < o.epsilon_levels; ++le, eps /= 2) {
      for (double alpha = o.alpha0; alpha >= o.alpha_floor; alpha *= o.alpha_factor) {
        AnsatzParams p;
        p.alpha = alpha;
        p.beta = beta;
        p.epsilon = eps;
        p.branch = o.branch;
        Ansatz sup(AnsatzKind::super, lib, p);
        bool all = true;
        std::vector<Certificate> certs;
        for (double tu : o.times) {
          const double t = tu * period;
          Certificate c = certify(sup, nl, super_box(*lib, p, o, t), t);
          ScanRow row{beta, eps, alpha, t, c.coarse.min_residual, c.tol_disc, c.pass_coarse && c.pass_fine};
          out.trace.push_back(row);
          all = all && row.pass;
          certs.push_back(std::move(c));
          if (!all) break;
        }
        if (all) {
          out.found = true;
          out.params = p;
          out.certificates = std::move(certs);
          return out;
        }
      }
    }
  }
  return out;
}

std::string scan_trace_csv(const ScanResult& r) {
  std::ostringstream os;
  os.precision(10);
  os << "beta,epsilon,alpha,t,min_residual,tol_disc,pass\n";
  for (const auto& row : r.trace)
    os << row.beta << ',' << row.epsilon << ',' << row.alpha << ',' << row.t << ',' << row.min_residual << ','
       << row.tol_disc << ',' << (row.pass ? 1 : 0) << '\n';
  return os.str();
}

ExperimentReport verify_monotone_super(const Ansatz& super, const BoxSpec& box, const std::vector<double>& times,
                                       double dt) {
  ExperimentReport rep;
  rep.id = "fronts.verify_monotone_super";
  const GridPtr g = box.grid();
  double min_d = std::numeric_limits<double>::infinity(), max_change = 0.0;
  for (double t : times) {
    std::vector<double> d1(g->size()), d2(g->size());
    parallel_for(g->size(), [&](std::size_t b, std::size_t e) {
      double z[2];
      for (std::size_t f = b; f < e; ++f) {
        g->coords(f, z);
        d1[f] = (super(t + dt, z) - super(t - dt, z)) / (2 * dt);
        d2[f] = (super(t + dt / 2, z) - super(t - dt / 2, z)) / dt;
      }
    });
    for (std::size_t f = 0; f < g->size(); ++f) {
      min_d = std::min(min_d, d1[f]);
      max_change = std::max(max_change, std::abs(d1[f] - d2[f]));
    }
  }
  const std::string where = "fronts.verify_monotone_super " + g->describe();
  rep.add("min_dVdt", min_d, ">", 0.0, Provenance::paper_formula, where);
  rep.add("step_halving_change", max_change, "<=", dt * dt, Provenance::derived_oracle, where);
  return rep;
}

double facet_coordinate(const DirectionFan& fan, double t, std::span<const double> z) {
  double m = std::numeric_limits<double>::infinity();
  const int d = fan.xdim();
  for (int i = 0; i < fan.n(); ++i) {
    double v = z[d];
    const double ct = 1.0 / std::tan(fan.theta[i]);
    for (int k = 0; k < d; ++k) v += z[k] * fan.nu[i][k] * ct;
    m = std::min(m, v);
  }
  return m - fan.chat * t;
}

double weighted_gap(const FieldFn& a, const FieldFn& b, const DirectionFan& fan, const GridPtr& box, double t,
                    double v_star) {
  std::vector<double> gap(box->size());
  parallel_for(box->size(), [&](std::size_t lo, std::size_t hi) {
    std::vector<double> z(box->dim());
    for (std::size_t f = lo; f < hi; ++f) {
      box->coords(f, z);
      const double w = std::min(1.0, std::exp(-v_star * facet_coordinate(fan, t, z)));
      gap[f] = std::abs(a(t, z) - b(t, z)) / w;
    }
  });
  return gap.empty() ? 0.0 : *std::max_element(gap.begin(), gap.end());
}

double v_star_estimate(const FrontLibrary& lib, double beta, double C3) {
  double m = std::min(beta, 1.0);
  double cot_max = 0.0;
  for (int i = 0; i < lib.fan.n(); ++i) {
    m = std::min(m, std::sin(lib.fan.theta[i]));
    cot_max = std::max(cot_max, 1.0 / std::tan(lib.fan.theta[i]));
  }
  m = std::min(m, 1.0 / std::sqrt(1.0 + (C3 + cot_max) * (C3 + cot_max)));
  return 0.99 * std::min(lib.kappa2 / 2.0, 3.0 * lib.kappa / 8.0 * m);
}

}  // namespace pulsefront
