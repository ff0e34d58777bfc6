#include "pulsefront/pulsating.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "pulsefront/blocktridiag.hpp"
#include "pulsefront/error.hpp"

namespace pulsefront {

const char* to_string(Normalization n) noexcept {
  return n == Normalization::pointwise ? "pointwise" : "weighted_l2";
}

Normalization normalization_from_string(const std::string& s) {
  if (s == "pointwise") return Normalization::pointwise;
  if (s == "weighted_l2") return Normalization::weighted_l2;
  fail(ErrorCode::config, "unknown normalization '" + s + "'");
}

double PulsatingFront::angle() const { return std::atan2(e.size() > 1 ? e[1] : 0.0, e[0]); }

std::vector<double> direction_from_angle(double a) { return {std::cos(a), std::sin(a)}; }

namespace {

using Vec = Eigen::VectorXd;

// Fourier differentiation matrices (row-major n x n) on n equispaced nodes of a period L.
void fourier_matrices(int n, double L, std::vector<double>& D1, std::vector<double>& D2) {
  D1.assign(static_cast<std::size_t>(n) * n, 0.0);
  D2.assign(static_cast<std::size_t>(n) * n, 0.0);
  if (n == 1) return;
  const double h = 2.0 * std::numbers::pi / n;
  const double sc = 2.0 * std::numbers::pi / L;
  const bool even = n % 2 == 0;
  for (int j = 0; j < n; ++j)
    for (int l = 0; l < n; ++l) {
      const std::size_t at = static_cast<std::size_t>(j) * n + l;
      if (j == l) {
        D2[at] = (even ? -std::numbers::pi * std::numbers::pi / (3.0 * h * h) - 1.0 / 6.0
                       : -std::numbers::pi * std::numbers::pi / (3.0 * h * h) + 1.0 / 12.0) *
                 sc * sc;
        continue;
      }
      const int d = j - l;
      const double x = d * h / 2.0;
      const double sign = (((d % 2) + 2) % 2 == 0) ? 1.0 : -1.0;
      const double sx = std::sin(x);
      if (even) {
        D1[at] = 0.5 * sign * std::cos(x) / sx * sc;
        D2[at] = -0.5 * sign / (sx * sx) * sc * sc;
      } else {
        D1[at] = 0.5 * sign / sx * sc;
        D2[at] = -0.5 * sign * std::cos(x) / (sx * sx) * sc * sc;
      }
    }
}

// Discrete profile equation on a strip: rows i = 1..Ns-1 are unknown, row 0 holds U = 1,
// and a ghost row Ns closes the leading edge with d_sU = -cU.
class ProfileSystem {
 public:
  ProfileSystem(const Nonlinearity& nl, std::vector<double> e, GridPtr grid, int s_order = 4)
      : nl_(nl), e_(std::move(e)), grid_(std::move(grid)), order_(s_order) {
    Ns_ = grid_->axis(0).count;
    ds_ = grid_->axis(0).spacing;
    Nz_ = grid_->size() / Ns_;
    nd_ = grid_->dim() - 1;
    line_.assign(nd_, std::vector<std::size_t>(Nz_));
    pos_.assign(nd_, std::vector<int>(Nz_));
    n_.resize(nd_);
    st_.resize(nd_);
    D1_.resize(nd_);
    D2_.resize(nd_);
    for (int k = 0; k < nd_; ++k) {
      const Axis& ax = grid_->axis(k + 1);
      n_[k] = ax.count;
      st_[k] = grid_->stride(k + 1);
      fourier_matrices(ax.count, ax.period(), D1_[k], D2_[k]);
    }
    amp_.resize(Nz_);
    std::vector<double> z(nd_);
    for (std::size_t j = 0; j < Nz_; ++j) {
      std::size_t r = j;
      for (int k = 0; k < nd_; ++k) {
        const int m = static_cast<int>(r / st_[k]);
        r %= st_[k];
        z[k] = grid_->axis(k + 1).coord(m);
        pos_[k][j] = m;
        line_[k][j] = j - st_[k] * m;
      }
      amp_[j] = nl_.amplitude(z);
    }
    i0_ = static_cast<int>(std::lround(-grid_->axis(0).lo / ds_));
  }

  std::size_t unknowns() const { return (Ns_ - 1) * Nz_; }
  int Ns() const { return Ns_; }
  std::size_t Nz() const { return Nz_; }
  int zero_row() const { return i0_; }
  double ds() const { return ds_; }

  double val(const std::vector<double>& U, double c, int i, std::size_t j) const {
    if (i == Ns_) return U[(Ns_ - 2) * Nz_ + j] - 2.0 * ds_ * c * U[(Ns_ - 1) * Nz_ + j];
    return U[i * Nz_ + j];
  }

  // Calls visit(i', j', coef, dcoef/dc) for every linear stencil entry of row (i, j).
  // Fourth-order s differences are used on rows whose five-point stencil stays inside the strip.
  template <class F>
  void stencil(int i, std::size_t j, double c, int order, F&& visit) const {
    static constexpr double kD2[5] = {-1.0 / 12, 16.0 / 12, -30.0 / 12, 16.0 / 12, -1.0 / 12};
    static constexpr double kD1[5] = {1.0 / 12, -8.0 / 12, 0.0, 8.0 / 12, -1.0 / 12};
    static constexpr double kD2lo[5] = {0.0, 1.0, -2.0, 1.0, 0.0};
    static constexpr double kD1lo[5] = {0.0, -0.5, 0.0, 0.5, 0.0};
    const bool high = order == 4 && i >= 2 && i <= Ns_ - 3;
    const double* d2 = high ? kD2 : kD2lo;
    const double* d1 = high ? kD1 : kD1lo;
    for (int o = -2; o <= 2; ++o) {
      const double a2 = d2[o + 2] / (ds_ * ds_), a1 = d1[o + 2] / ds_;
      if (a2 == 0.0 && a1 == 0.0) continue;
      visit(i + o, j, a2 + c * a1, a1);
    }
    for (int k = 0; k < nd_; ++k) {
      const int n = n_[k];
      if (n == 1) continue;
      const double* L2 = D2_[k].data() + static_cast<std::size_t>(pos_[k][j]) * n;
      const double* L1 = D1_[k].data() + static_cast<std::size_t>(pos_[k][j]) * n;
      const std::size_t base = line_[k][j];
      for (int m = 0; m < n; ++m) visit(i, base + st_[k] * m, L2[m], 0.0);
      const double ek = k < static_cast<int>(e_.size()) ? 2.0 * e_[k] : 0.0;
      if (ek == 0.0) continue;
      for (int o = -2; o <= 2; ++o) {
        const double a1 = d1[o + 2] / ds_;
        if (a1 == 0.0) continue;
        for (int m = 0; m < n; ++m)
          if (L1[m] != 0.0) visit(i + o, base + st_[k] * m, ek * a1 * L1[m], 0.0);
      }
    }
  }

  // Residual at unknown rows, ordered (i-1)*Nz + j.
  void residual(const std::vector<double>& U, double c, Vec& R) const {
    R.resize(static_cast<Eigen::Index>(unknowns()));
    for (int i = 1; i < Ns_; ++i)
      for (std::size_t j = 0; j < Nz_; ++j) {
        double acc = nl_.f_at(amp_[j], U[i * Nz_ + j]);
        stencil(i, j, c, order_, [&](int ii, std::size_t jj, double coef, double) { acc += coef * val(U, c, ii, jj); });
        R[static_cast<Eigen::Index>((i - 1) * Nz_ + j)] = acc;
      }
  }

  // Jacobian blocks of R - shift*U (block row b = s row b+1) and the column dR/dc.
  void assemble(const std::vector<double>& U, double c, double shift, BlockTridiag& J, Vec& Rc) const {
    const int m = Ns_ - 1;
    const int n = static_cast<int>(Nz_);
    J.reset(m, n);
    Rc.setZero(static_cast<Eigen::Index>(unknowns()));
    for (int i = 1; i < Ns_; ++i) {
      const int b = i - 1;
      auto& D = J.diag(b);
      for (std::size_t j = 0; j < Nz_; ++j) {
        const int row = static_cast<int>(j);
        D(row, row) += nl_.f_u_at(amp_[j], U[i * Nz_ + j]) - shift;
        double rc = 0.0;
        auto put = [&](int ii, std::size_t jj, double coef) {
          const int col = static_cast<int>(jj);
          if (ii - 1 == b) D(row, col) += coef;
          else if (ii - 1 == b - 1) J.add_lower(b, row, col, coef);
          else J.add_upper(b, row, col, coef);
        };
        stencil(i, j, c, 2, [&](int ii, std::size_t jj, double coef, double dcoef) {
          if (ii == 0) {
            rc += dcoef;
          } else if (ii == Ns_) {
            put(Ns_ - 2, jj, coef);
            put(Ns_ - 1, jj, -2.0 * ds_ * c * coef);
            rc += dcoef * val(U, c, ii, jj) - 2.0 * ds_ * coef * U[(Ns_ - 1) * Nz_ + jj];
          } else {
            put(ii, jj, coef);
            rc += dcoef * U[ii * Nz_ + jj];
          }
        });
        Rc[static_cast<Eigen::Index>(b * Nz_ + j)] = rc;
      }
    }
  }

  // Flat (i*Nz + j) index of the lowest-index argmin of U over the s = 0 row.
  std::size_t phase_node(const std::vector<double>& U) const {
    std::size_t best = 0;
    double bv = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < Nz_; ++j)
      if (U[i0_ * Nz_ + j] < bv) {
        bv = U[i0_ * Nz_ + j];
        best = j;
      }
    return best;
  }

  const Nonlinearity& nl() const { return nl_; }

 private:
  const Nonlinearity& nl_;
  std::vector<double> e_;
  GridPtr grid_;
  int order_ = 4;
  int Ns_ = 0, nd_ = 0, i0_ = 0;
  std::size_t Nz_ = 0;
  double ds_ = 0.0;
  std::vector<double> amp_;
  std::vector<int> n_;
  std::vector<std::size_t> st_;
  std::vector<std::vector<double>> D1_, D2_;  // Fourier differentiation matrices per axis
  std::vector<std::vector<std::size_t>> line_;
  std::vector<std::vector<int>> pos_;
};

double inf_norm(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

struct IterationState {
  std::vector<double> U;
  double c = 0.0;
  double residual = 0.0;
  int newton = 0;
  int ptc = 0;
};

// Pseudo-transient continuation of dU/dtau = R(U, c) with c slaved to the phase condition,
// switching to damped Newton once the pseudo time step has grown large.
bool iterate(const ProfileSystem& sys, IterationState& st, const PulsatingOptions& opts, double dt0) {
  const double target = 0.5 * (1.0 + sys.nl().theta());
  const std::size_t Nz = sys.Nz();
  const std::size_t n = sys.unknowns();
  BlockTridiag J;
  Vec R, Rc, x, Rt;
  Eigen::MatrixXd rhs(static_cast<Eigen::Index>(n), 2);
  sys.residual(st.U, st.c, R);
  double rn = inf_norm(R);
  double dtau = dt0;
  int newton_steps = 0;
  std::vector<double> trial(st.U.size());
  for (int step = 0; step < opts.ptc_max_steps + opts.max_newton; ++step) {
    if (rn < opts.newton_tol) {
      st.residual = rn;
      return true;
    }
    const bool newton = dtau > 1e8;
    if (newton && ++newton_steps > opts.max_newton) break;
    const std::size_t pz = sys.phase_node(st.U);
    const std::size_t pflat = static_cast<std::size_t>(sys.zero_row()) * Nz + pz;
    sys.assemble(st.U, st.c, newton ? 0.0 : 1.0 / dtau, J, Rc);
    // Bordered elimination of (dU, dc): J dU + Rc dc = -R with dU_p = target - U_p.
    rhs.col(0) = -R;
    rhs.col(1) = Rc;
    bool ok = J.factor();
    if (ok) {
      J.solve(rhs);
      ok = rhs.allFinite();
    }
    const Eigen::Index p = static_cast<Eigen::Index>(pflat - Nz);
    if (ok && std::abs(rhs(p, 1)) > 0.0) {
      const double dc = (rhs(p, 0) - (target - st.U[pflat])) / rhs(p, 1);
      x.resize(static_cast<Eigen::Index>(n + 1));
      x.head(static_cast<Eigen::Index>(n)) = rhs.col(0) - dc * rhs.col(1);
      x[static_cast<Eigen::Index>(n)] = dc;
      ok = x.allFinite();
    } else {
      ok = false;
    }
    if (!ok) {
      dtau = std::min(dtau, 1e6) * 0.1;
      if (dtau < 1e-8) break;
      continue;
    }
    double alpha = 1.0;
    bool accepted = false;
    double rt = 0.0, ct = st.c;
    for (int ls = 0; ls < (newton ? 8 : 1); ++ls) {
      trial = st.U;
      for (std::size_t r = 0; r < n; ++r) trial[r + Nz] += alpha * x[static_cast<Eigen::Index>(r)];
      ct = st.c + alpha * x[static_cast<Eigen::Index>(n)];
      sys.residual(trial, ct, Rt);
      rt = inf_norm(Rt);
      if (std::isfinite(rt) && ct > 0.0 && (rt < rn || (!newton && rt < 10.0 * rn))) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      dtau = std::min(dtau, 1e6) * 0.2;
      if (dtau < 1e-8) break;
      continue;
    }
    st.U.swap(trial);
    st.c = ct;
    R = Rt;
    const double ratio = rn / std::max(rt, 1e-300);
    rn = rt;
    if (newton) ++st.newton;
    else ++st.ptc;
    if (!newton) dtau = std::min(dtau * std::clamp(ratio, 0.5, 4.0), 1e9);
  }
  st.residual = rn;
  return false;
}

void fit_tails(PulsatingFront& fr, const Nonlinearity& nl) {
  const Grid& g = *fr.profile.grid;
  const int Ns = g.axis(0).count;
  const std::size_t Nz = g.size() / Ns;
  std::vector<double> xs, ys;
  for (int i = 1; i < Ns; ++i) {
    const double s = g.axis(0).coord(i);
    if (s > 0.0) break;
    double m = 0.0;
    for (std::size_t j = 0; j < Nz; ++j) m = std::max(m, 1.0 - fr.profile.values[i * Nz + j]);
    if (m >= 1e-7 && m <= 1e-3) {
      xs.push_back(s);
      ys.push_back(std::log(m));
    }
  }
  if (xs.size() >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(xs.size());
    for (std::size_t k = 0; k < xs.size(); ++k) {
      sx += xs[k];
      sy += ys[k];
      sxx += xs[k] * xs[k];
      sxy += xs[k] * ys[k];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    fr.tail_kappa2 = slope;
    fr.tail_cminus = std::exp((sy - slope * sx) / n);
  }
  if (!(fr.tail_kappa2 > 0.0) || !std::isfinite(fr.tail_cminus)) {
    fr.tail_kappa2 = 0.5 * (-fr.c + std::sqrt(fr.c * fr.c + 4.0 * nl.kappa1()));
    double m = 0.0;
    const double s1 = g.axis(0).coord(1);
    for (std::size_t j = 0; j < Nz; ++j) m = std::max(m, 1.0 - fr.profile.values[Nz + j]);
    fr.tail_cminus = std::max(m, 0.0) * std::exp(-fr.tail_kappa2 * s1);
  }
}

// Profile in grid coordinates with the exponential tail models outside the strip.
double eval_grid(const PulsatingFront& fr, double s, std::span<const double> z, double* dval) {
  const Axis& a = fr.profile.grid->axis(0);
  const double smax = a.hi(), smin = a.lo;
  double buf[4];
  const int nd = fr.profile.grid->dim() - 1;
  buf[0] = s;
  for (int k = 0; k < nd; ++k) buf[k + 1] = z[k];
  std::span<const double> x(buf, static_cast<std::size_t>(nd + 1));
  if (s > smax) {
    buf[0] = smax;
    const double edge = (*fr.spline)(x);
    const double v = edge * std::exp(-fr.c * (s - smax));
    if (dval) *dval = -fr.c * v;
    return v;
  }
  if (s < smin) {
    const double t = fr.tail_cminus * std::exp(fr.tail_kappa2 * s);
    if (dval) *dval = t < 1.0 ? -fr.tail_kappa2 * t : 0.0;
    return std::clamp(1.0 - t, 0.0, 1.0);
  }
  if (dval) return fr.spline->eval_d0(x, *dval);
  return (*fr.spline)(x);
}

void finalize(PulsatingFront& fr, const ProfileSystem& sys, const Nonlinearity& nl, const IterationState& st) {
  fr.c = st.c;
  fr.profile.values = st.U;
  fr.residual = st.residual;
  fr.newton_iterations = st.newton;
  fr.ptc_steps = st.ptc;
  const int Ns = sys.Ns();
  const std::size_t Nz = sys.Nz();
  fr.boundary_top = 0.0;
  fr.boundary_bottom = 0.0;
  for (std::size_t j = 0; j < Nz; ++j) {
    fr.boundary_top = std::max(fr.boundary_top, std::abs(st.U[(Ns - 1) * Nz + j]));
    fr.boundary_bottom = std::max(fr.boundary_bottom, std::abs(1.0 - st.U[Nz + j]));
  }
  fr.phase_node = sys.phase_node(st.U);
  fr.spline = std::make_shared<StripInterpolant>(fr.profile);
  fit_tails(fr, nl);
}

std::vector<double> seed_from(const PulsatingFront& warm, const Grid& g) {
  std::vector<double> U(g.size());
  std::vector<double> x(g.dim());
  for (std::size_t f = 0; f < g.size(); ++f) {
    g.coords(f, x);
    U[f] = eval_grid(warm, x[0], std::span<const double>(x).subspan(1), nullptr);
  }
  const std::size_t Nz = g.size() / g.axis(0).count;
  for (std::size_t j = 0; j < Nz; ++j) U[j] = 1.0;
  return U;
}

PulsatingFront solve_fixed_window(const std::vector<double>& e, const Nonlinearity& nl, const StripSpec& strip,
                                  const PulsatingOptions& opts, const PulsatingFront* warm) {
  PulsatingFront fr;
  fr.e = e;
  fr.reaction = nl.params();
  auto grid = Grid::strip(strip.s_min, strip.s_max, strip.ds, nl.cell(), strip.z_points);
  fr.profile = Field(grid, 0.0);
  ProfileSystem sys(nl, e, grid, opts.s_order);
  fr.s_order = opts.s_order;

  IterationState st;
  if (warm) {
    st.U = seed_from(*warm, *grid);
    st.c = warm->c;
  } else {
    // Homogeneous 1D front at the mean amplitude, computed on a one-node torus.
    ReactionParams hp = nl.params();
    hp.mode = AmplitudeMode::homogeneous;
    hp.level = 1.0;
    Nonlinearity hom(hp);
    StripSpec s1 = strip;
    s1.z_points.assign(strip.z_points.size(), 1);
    auto g1 = Grid::strip(s1.s_min, s1.s_max, s1.ds, nl.cell(), s1.z_points);
    ProfileSystem sys1(hom, e, g1, opts.s_order);
    IterationState s0;
    const double target = 0.5 * (1.0 + nl.theta());
    s0.U.resize(g1->size());
    for (int i = 0; i < g1->axis(0).count; ++i) {
      const double s = g1->axis(0).coord(i);
      s0.U[i] = 1.0 / (1.0 + std::exp(s + std::log((1.0 - target) / target)));
    }
    s0.U[0] = 1.0;
    s0.c = 0.5;
    if (!iterate(sys1, s0, opts, opts.ptc_dt0))
      fail(ErrorCode::newton_divergence, "homogeneous initializer did not converge (residual " +
                                             std::to_string(s0.residual) + ")");
    PulsatingFront f1;
    f1.e = e;
    f1.c = s0.c;
    f1.profile = Field(g1, s0.U);
    f1.spline = std::make_shared<StripInterpolant>(f1.profile);
    fit_tails(f1, hom);
    st.U = seed_from(f1, *grid);
    st.c = s0.c;
  }

  IterationState start = st;
  double dt0 = opts.ptc_dt0;
  for (int attempt = 0; attempt <= opts.max_restarts; ++attempt) {
    if (iterate(sys, st, opts, dt0)) {
      finalize(fr, sys, nl, st);
      return fr;
    }
    st = start;
    dt0 *= 0.1;
  }
  fail(ErrorCode::newton_divergence,
       "profile iteration diverged after restarts (last residual " + std::to_string(st.residual) + ")");
}

}  // namespace

PulsatingFront solve_pulsating_front(const std::vector<double>& e, const Nonlinearity& nl, const StripSpec& strip,
                                     const PulsatingOptions& opts, const PulsatingFront* warm) {
  require(static_cast<int>(e.size()) == nl.dim(), ErrorCode::invalid_argument, "direction has wrong dimension");
  double norm = 0.0;
  for (double v : e) norm += v * v;
  require(std::abs(std::sqrt(norm) - 1.0) < 1e-12, ErrorCode::invalid_argument, "direction must be a unit vector");
  require(static_cast<int>(strip.z_points.size()) == nl.dim(), ErrorCode::invalid_argument,
          "strip z_points must match the cell dimension");

  StripSpec cur = strip;
  PulsatingFront fr = solve_fixed_window(e, nl, cur, opts, warm);
  int widenings = 0;
  while (fr.boundary_top >= opts.boundary_tol || fr.boundary_bottom >= opts.boundary_tol) {
    if (widenings >= opts.max_widenings)
      fail(ErrorCode::window_too_narrow, "strip window too narrow after " + std::to_string(widenings) +
                                             " widenings (top " + std::to_string(fr.boundary_top) + ", bottom " +
                                             std::to_string(fr.boundary_bottom) + ")");
    if (fr.boundary_top >= opts.boundary_tol) cur.s_max += opts.widen_step;
    if (fr.boundary_bottom >= opts.boundary_tol) cur.s_min -= opts.widen_step;
    ++widenings;
    PulsatingFront prev = fr;
    fr = solve_fixed_window(e, nl, cur, opts, &prev);
  }
  fr.widenings = widenings;
  return fr;
}

double profile_residual(const PulsatingFront& front, const Nonlinearity& nl) {
  ProfileSystem sys(nl, front.e, front.profile.grid, front.s_order);
  Vec R;
  sys.residual(front.profile.values, front.c, R);
  return inf_norm(R);
}

double evaluate_front(const PulsatingFront& front, double s, std::span<const double> z) {
  require(front.spline != nullptr, ErrorCode::precondition, "front has no profile");
  return eval_grid(front, s + front.s_offset, z, nullptr);
}

double evaluate_front(const PulsatingFront& front, double s, std::span<const double> z, double& ds_value) {
  require(front.spline != nullptr, ErrorCode::precondition, "front has no profile");
  return eval_grid(front, s + front.s_offset, z, &ds_value);
}

namespace {

// Per z-node 1D splines of the profile columns, for quadrature in s.
struct ColumnSplines {
  std::vector<TensorSpline> cols;
  std::vector<double> edge;  // value at s_max
  double smin = 0, smax = 0, ds = 0, weight = 0;

  explicit ColumnSplines(const PulsatingFront& fr) {
    const Grid& g = *fr.profile.grid;
    const Axis a = g.axis(0);
    smin = a.lo;
    smax = a.hi();
    ds = a.spacing;
    const std::size_t Nz = g.size() / a.count;
    double vol = 1.0;
    for (int k = 1; k < g.dim(); ++k) vol *= g.axis(k).period();
    weight = vol / static_cast<double>(Nz);
    auto g1 = std::make_shared<Grid>(GridKind::strip, std::vector<Axis>{a}, BoundaryPolicy::dirichlet_from_field);
    for (std::size_t j = 0; j < Nz; ++j) {
      std::vector<double> v(a.count);
      for (int i = 0; i < a.count; ++i) v[i] = fr.profile.values[i * Nz + j];
      edge.push_back(v.back());
      cols.emplace_back(Field(g1, std::move(v)));
    }
  }
};

// int_{sigma0}^{inf} e^{-2c(sigma - smax)} (1 + e^{2 eps (sigma - shift)}) d sigma
double tail_integral(double sigma0, double smax, double c, double eps, double shift) {
  const double a = std::exp(-2.0 * c * (sigma0 - smax));
  double out = a / (2.0 * c);
  const double r = 2.0 * (c - eps);
  out += std::exp(-2.0 * c * (sigma0 - smax) + 2.0 * eps * (sigma0 - shift)) / r;
  return out;
}

// Functional of the grid profile shifted by `shift` (grid coordinate sigma = s + shift).
double functional_at(const ColumnSplines& cs, double c, double eps, double shift) {
  static const double gx[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                               0.9061798459386640};
  static const double gw[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
                               0.2369268850561891};
  double total = 0.0;
  const double lo = std::max(shift, cs.smin);
  const int first = static_cast<int>(std::floor((lo - cs.smin) / cs.ds));
  const int last = static_cast<int>(std::lround((cs.smax - cs.smin) / cs.ds));
  double sig;
  std::span<const double> sp(&sig, 1);
  for (std::size_t j = 0; j < cs.cols.size(); ++j) {
    double acc = 0.0;
    for (int i = std::max(first, 0); i < last; ++i) {
      const double a = std::max(cs.smin + i * cs.ds, lo), b = cs.smin + (i + 1) * cs.ds;
      if (b <= a) continue;
      const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
      for (int q = 0; q < 5; ++q) {
        sig = mid + half * gx[q];
        const double u = cs.cols[j](sp);
        acc += gw[q] * half * u * u * (1.0 + std::exp(2.0 * eps * (sig - shift)));
      }
    }
    const double edge = cs.edge[j];
    acc += edge * edge * tail_integral(std::max(cs.smax, lo), cs.smax, c, eps, shift);
    if (shift < cs.smin) {
      const double len = cs.smin - shift;
      acc += len + (eps > 0.0 ? std::expm1(2.0 * eps * len) / (2.0 * eps) : len);
    }
    total += cs.weight * acc;
  }
  return total;
}

double min_row_value(const PulsatingFront& fr, double sigma) {
  const Grid& g = *fr.profile.grid;
  const std::size_t Nz = g.size() / g.axis(0).count;
  std::vector<double> x(g.dim());
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < Nz; ++j) {
    g.coords(j, x);
    x[0] = sigma;
    m = std::min(m, (*fr.spline)(x));
  }
  return m;
}

// Root of the decreasing function fn on [lo, hi] by bisection to full precision.
template <class F>
double bisect_decreasing(F&& fn, double lo, double hi, double target) {
  double flo = fn(lo) - target, fhi = fn(hi) - target;
  require(flo >= 0.0 && fhi <= 0.0, ErrorCode::not_bracketed, "normalization target not bracketed in the strip");
  for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = fn(mid) - target;
    if (fm >= 0.0) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double weighted_l2_functional(const PulsatingFront& front, double eps, double extra_shift) {
  require(front.spline != nullptr, ErrorCode::precondition, "front has no profile");
  require(eps >= 0.0 && eps < front.c, ErrorCode::invalid_argument, "epsilon_rho must lie in [0, c)");
  ColumnSplines cs(front);
  return functional_at(cs, front.c, eps, front.s_offset + extra_shift);
}

RenormalizeResult renormalize(const PulsatingFront& front, Normalization mode, double epsilon_rho) {
  require(front.spline != nullptr, ErrorCode::precondition, "front has no profile");
  const Axis a = front.profile.grid->axis(0);
  const double lo = a.lo + a.spacing, hi = a.hi() - a.spacing;
  RenormalizeResult out{front, 0.0};
  double offset = front.s_offset;
  if (mode == Normalization::pointwise) {
    const double target = 0.5 * (1.0 + front.reaction.theta);
    if (std::abs(min_row_value(front, front.s_offset) - target) > 1e-12)
      offset = bisect_decreasing([&](double sg) { return min_row_value(front, sg); }, lo, hi, target);
    out.front.epsilon_rho = 0.0;
  } else {
    require(epsilon_rho > 0.0 && epsilon_rho < front.c, ErrorCode::invalid_argument,
            "weighted_l2 needs 0 < epsilon_rho < c");
    ColumnSplines cs(front);
    offset = bisect_decreasing([&](double sg) { return functional_at(cs, front.c, epsilon_rho, sg); }, lo, hi, 1.0);
    out.front.epsilon_rho = epsilon_rho;
  }
  out.shift = offset - front.s_offset;
  out.front.s_offset = offset;
  out.front.normalization = mode;
  return out;
}

DecayDiagnostics decay_diagnostics(const PulsatingFront& front, double kappa) {
  const Grid& g = *front.profile.grid;
  const Axis a = g.axis(0);
  const int Ns = a.count, nd = g.dim() - 1;
  const std::size_t Nz = g.size() / Ns;
  const auto& U = front.profile.values;
  const double c = front.c;
  auto at = [&](int i, std::size_t j) {
    if (i >= Ns) return U[(Ns - 2) * Nz + j] - 2.0 * a.spacing * c * U[(Ns - 1) * Nz + j];
    return U[i * Nz + j];
  };
  DecayDiagnostics d;
  std::vector<double> xs, ys, rowmax(Ns, 0.0);
  for (int i = 0; i < Ns; ++i)
    for (std::size_t j = 0; j < Nz; ++j) rowmax[i] = std::max(rowmax[i], U[i * Nz + j]);
  for (int i = 1; i < Ns; ++i)
    if (rowmax[i] >= 1e-7 && rowmax[i] <= 1e-3) {
      xs.push_back(a.coord(i));
      ys.push_back(std::log(rowmax[i]));
    }
  require(xs.size() >= 3, ErrorCode::fit_window_empty, "decay fit window [1e-7, 1e-3] is empty");
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sx += xs[k];
    sy += ys[k];
    sxx += xs[k] * xs[k];
    sxy += xs[k] * ys[k];
  }
  d.lambda_fit = -(n * sxy - sx * sy) / (n * sxx - sx * sx);
  d.lambda_rel_dev = std::abs(d.lambda_fit - c) / c;
  d.fit_points = static_cast<int>(xs.size());

  // Plateau of d_sU/U over the last decade, gradient ratio over the whole fit window.
  std::vector<int> zstride(nd);
  for (int k = 0; k < nd; ++k) zstride[k] = static_cast<int>(g.stride(k + 1));
  double rsum = 0.0, rmax = 0.0, dsum = 0.0;
  int rcount = 0;
  std::vector<int> m(g.dim());
  for (int i = 1; i < Ns; ++i) {
    if (!(rowmax[i] >= 1e-7 && rowmax[i] <= 1e-3)) continue;
    const bool last_decade = rowmax[i] <= 1e-6;
    for (std::size_t j = 0; j < Nz; ++j) {
      const double u = U[i * Nz + j];
      const double du = (at(i + 1, j) - at(i - 1, j)) / (2.0 * a.spacing);
      dsum += du;
      if (last_decade) {
        rsum += du / u;
        rmax = std::max(rmax, std::abs(du / u + c) / c);
        ++rcount;
      }
      g.unravel(i * Nz + j, m);
      double gsq = 0.0;
      for (int k = 0; k < nd; ++k) {
        const Axis& ak = g.axis(k + 1);
        const std::size_t st = g.stride(k + 1);
        const std::size_t jp = j + st * ((m[k + 1] + 1) % ak.count) - st * m[k + 1];
        const std::size_t jm = j + st * ((m[k + 1] + ak.count - 1) % ak.count) - st * m[k + 1];
        const double dz = (U[i * Nz + jp] - U[i * Nz + jm]) / (2.0 * ak.spacing);
        gsq += dz * dz;
      }
      d.grad_ratio = std::max(d.grad_ratio, std::sqrt(gsq) / u);
    }
  }
  require(rcount > 0, ErrorCode::fit_window_empty, "last decade [1e-7, 1e-6] has no nodes");
  d.ratio_plateau = rsum / rcount;
  d.ratio_rel_dev = rmax;
  d.c2_sign = dsum < 0.0 ? -1.0 : (dsum > 0.0 ? 1.0 : 0.0);

  const double rate = 0.75 * (kappa > 0.0 ? kappa : c);
  double k2num = 0.0;
  for (int i = 0; i < Ns; ++i) {
    const double s = a.coord(i) - front.s_offset;
    if (s >= 0.0) d.kbar_ahead = std::max(d.kbar_ahead, rowmax[i] * std::exp(rate * s));
  }
  d.kappa2_fit = front.tail_kappa2;
  for (int i = 0; i < Ns; ++i) {
    const double s = a.coord(i) - front.s_offset;
    if (s > 0.0) break;
    double m1 = 0.0;
    for (std::size_t j = 0; j < Nz; ++j) m1 = std::max(m1, 1.0 - U[i * Nz + j]);
    k2num = std::max(k2num, m1 * std::exp(-d.kappa2_fit * s));
  }
  d.kbar_behind = k2num;
  return d;
}

namespace {
double ds_at(const PulsatingFront& fr, int i, std::size_t j) {
  const Grid& g = *fr.profile.grid;
  const Axis a = g.axis(0);
  const int Ns = a.count;
  const std::size_t Nz = g.size() / Ns;
  const auto& U = fr.profile.values;
  const double up = i + 1 >= Ns ? U[(Ns - 2) * Nz + j] - 2.0 * a.spacing * fr.c * U[(Ns - 1) * Nz + j]
                                : U[(i + 1) * Nz + j];
  return (up - U[(i - 1) * Nz + j]) / (2.0 * a.spacing);
}
}  // namespace

double interior_slope_bound(const PulsatingFront& front, double q) {
  require(q > 0.0, ErrorCode::invalid_argument, "q must be positive");
  const Grid& g = *front.profile.grid;
  const Axis a = g.axis(0);
  const std::size_t Nz = g.size() / a.count;
  require(a.lo + a.spacing <= -q + front.s_offset && a.hi() - a.spacing >= q + front.s_offset,
          ErrorCode::out_of_range, "[-q, q] is not inside the strip");
  double r = std::numeric_limits<double>::infinity();
  for (int i = 1; i < a.count; ++i) {
    const double s = a.coord(i) - front.s_offset;
    if (s < -q - 1e-12 || s > q + 1e-12) continue;
    for (std::size_t j = 0; j < Nz; ++j) r = std::min(r, -ds_at(front, i, j));
  }
  return r;
}

double max_interior_ds(const PulsatingFront& front) {
  const Grid& g = *front.profile.grid;
  const int Ns = g.axis(0).count;
  const std::size_t Nz = g.size() / Ns;
  double m = -std::numeric_limits<double>::infinity();
  for (int i = 1; i < Ns; ++i)
    for (std::size_t j = 0; j < Nz; ++j) m = std::max(m, ds_at(front, i, j));
  return m;
}

SpeedMap build_speed_map(const Nonlinearity& nl, const std::vector<double>& angles, const StripSpec& strip,
                         const PulsatingOptions& opts, bool keep_fronts) {
  SpeedMap map;
  PulsatingFront prev;
  bool have_prev = false;
  for (double a : angles) {
    try {
      PulsatingFront fr = solve_pulsating_front(direction_from_angle(a), nl, strip, opts, have_prev ? &prev : nullptr);
      map.angles.push_back(a);
      map.speeds.push_back(fr.c);
      prev = fr;
      have_prev = true;
      if (keep_fronts) map.fronts.push_back(std::move(fr));
    } catch (const Error& err) {
      throw SpeedMapError(err, map);
    }
  }
  if (!map.speeds.empty()) {
    map.kappa = *std::min_element(map.speeds.begin(), map.speeds.end());
    map.K = *std::max_element(map.speeds.begin(), map.speeds.end());
  }
  for (std::size_t k = 1; k < map.speeds.size(); ++k)
    map.max_jump = std::max(map.max_jump, std::abs(map.speeds[k] - map.speeds[k - 1]));
  return map;
}

double interpolate_speed(const SpeedMap& map, double a) {
  require(map.angles.size() >= 2, ErrorCode::precondition, "speed map needs at least two samples");
  CardinalSpline sp(map.angles);
  const auto w = sp.weights(a);
  double c = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) c += w[k] * map.speeds[k];
  return c;
}

}  // namespace pulsefront
