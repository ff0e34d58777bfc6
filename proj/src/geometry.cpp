#include "pulsefront/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "pulsefront/error.hpp"

namespace pulsefront {

std::vector<double> DirectionFan::direction(int i) const {
  std::vector<double> e(dim());
  for (int k = 0; k < xdim(); ++k) e[k] = nu[i][k] * std::cos(theta[i]);
  e.back() = std::sin(theta[i]);
  return e;
}

double DirectionFan::polar_angle(int i) const {
  require(dim() == 2, ErrorCode::precondition, "polar angles need a planar fan");
  const auto e = direction(i);
  return std::atan2(e[1], e[0]);
}

void DirectionFan::validate() const {
  require(n() >= 2 && nu.size() == theta.size(), ErrorCode::invalid_argument, "fan needs at least two directions");
  const int d = xdim();
  require(d >= 1, ErrorCode::invalid_argument, "fan directions need a nonempty nu");
  for (int i = 0; i < n(); ++i) {
    require(static_cast<int>(nu[i].size()) == d, ErrorCode::invalid_argument, "fan nu vectors differ in length");
    double s = 0.0;
    for (double v : nu[i]) s += v * v;
    require(std::abs(s - 1.0) < 1e-12, ErrorCode::invalid_argument, "fan nu must be unit vectors");
    require(std::isfinite(theta[i]) && theta[i] > 0.0 && theta[i] <= std::numbers::pi / 2 + 1e-15,
            ErrorCode::invalid_argument, "fan theta must lie in (0, pi/2]");
  }
  for (int i = 0; i < n(); ++i)
    for (int j = i + 1; j < n(); ++j) {
      const auto a = direction(i), b = direction(j);
      double diff = 0.0;
      for (std::size_t k = 0; k < a.size(); ++k) diff = std::max(diff, std::abs(a[k] - b[k]));
      require(diff > 1e-12, ErrorCode::invalid_argument, "fan directions must be distinct");
    }
  require(speeds.empty() || static_cast<int>(speeds.size()) == n(), ErrorCode::invalid_argument,
          "fan speeds must match the directions");
}

void DirectionFan::set_speeds(std::vector<double> c) {
  require(static_cast<int>(c.size()) == n(), ErrorCode::invalid_argument, "one speed per fan direction");
  speeds = std::move(c);
  double acc = 0.0;
  for (int i = 0; i < n(); ++i) acc += speeds[i] / std::sin(theta[i]);
  chat = acc / n();
}

double DirectionFan::compat_residual() const {
  require(static_cast<int>(speeds.size()) == n() && chat > 0.0, ErrorCode::precondition, "fan speeds not set");
  double r = 0.0;
  for (int i = 0; i < n(); ++i) r = std::max(r, std::abs(speeds[i] / std::sin(theta[i]) - chat) / chat);
  return r;
}

DirectionFan DirectionFan::symmetric_2d(double theta) {
  DirectionFan f;
  f.nu = {{-1.0}, {1.0}};
  f.theta = {theta, theta};
  f.validate();
  return f;
}

double q(const DirectionFan& fan, int i, std::span<const double> x, double y) {
  double acc = y * std::sin(fan.theta[i]);
  const double ct = std::cos(fan.theta[i]);
  for (int k = 0; k < fan.xdim(); ++k) acc += x[k] * fan.nu[i][k] * ct;
  return acc;
}

double psi(const DirectionFan& fan, std::span<const double> x) {
  double m = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < fan.n(); ++i) {
    double dot = 0.0;
    for (int k = 0; k < fan.xdim(); ++k) dot += x[k] * fan.nu[i][k];
    m = std::max(m, -dot / std::tan(fan.theta[i]));
  }
  return m;
}

double estimate_c3(const DirectionFan& fan, double radius, int samples) {
  require(radius > 0.0 && samples >= 2, ErrorCode::invalid_argument, "c3 sampling needs a positive radius");
  const int d = fan.xdim();
  const int per = d == 1 ? samples : std::max(2, static_cast<int>(std::lround(std::pow(samples, 1.0 / d))));
  std::size_t total = 1;
  for (int k = 0; k < d; ++k) total *= static_cast<std::size_t>(per);
  double worst = 0.0;
  std::vector<double> x(d);
  for (std::size_t n = 0; n < total; ++n) {
    std::size_t r = n;
    for (int k = 0; k < d; ++k) {
      x[k] = -radius + 2.0 * radius * static_cast<double>(r % per) / (per - 1);
      r /= per;
    }
    const SurfaceEval s = solve_phi(fan, x);
    if (!(s.h > 0.0)) continue;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < fan.n(); ++i) {
      const double cot = 1.0 / std::tan(fan.theta[i]);
      double e2 = 0.0;
      for (int k = 0; k < d; ++k) e2 += (s.grad[k] + fan.nu[i][k] * cot) * (s.grad[k] + fan.nu[i][k] * cot);
      best = std::min(best, std::sqrt(e2));
    }
    worst = std::max(worst, best / s.h);
  }
  return worst;
}

ExperimentReport check_surface(const DirectionFan& fan, int samples, std::uint64_t seed, double radius) {
  fan.validate();
  require(samples >= 1 && radius > 0.0, ErrorCode::invalid_argument, "surface check needs samples and a radius");
  ExperimentReport rep;
  rep.id = "surface";
  const int d = fan.xdim();
  const std::string where = "geometry.solve_phi on " + std::to_string(samples) + " random x, radius " +
                            std::to_string(radius);

  // Fit C on a lattice first; the random samples then have to respect it.
  double c_fit = 0.0;
  {
    const int per = d == 1 ? 2001 : std::max(3, static_cast<int>(std::lround(std::pow(2001.0, 1.0 / d))));
    std::size_t total = 1;
    for (int k = 0; k < d; ++k) total *= static_cast<std::size_t>(per);
    std::vector<double> x(d);
    for (std::size_t n = 0; n < total; ++n) {
      std::size_t r = n;
      for (int k = 0; k < d; ++k) {
        x[k] = -radius + 2.0 * radius * static_cast<double>(r % per) / (per - 1);
        r /= per;
      }
      const SurfaceEval s = solve_phi(fan, x);
      if (s.h > 0.0) c_fit = std::max(c_fit, (s.phi - psi(fan, x)) / s.h);
    }
    c_fit *= 1.05;
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-radius, radius);
  double max_res = 0.0, min_gap = std::numeric_limits<double>::infinity(), max_ratio = 0.0;
  double err_h = 0.0, err_h2 = 0.0;
  const double fd = 1e-3;
  std::vector<double> x(d), xp(d), xm(d);
  for (int n = 0; n < samples; ++n) {
    for (int k = 0; k < d; ++k) x[k] = unif(rng);
    const SurfaceEval s = solve_phi(fan, x);
    max_res = std::max(max_res, s.residual);
    const double gap = s.phi - psi(fan, x);
    min_gap = std::min(min_gap, gap);
    if (s.h > 0.0) max_ratio = std::max(max_ratio, gap / (c_fit * s.h));
    for (int k = 0; k < d; ++k) {
      for (const double step : {fd, fd / 2}) {
        xp = x;
        xm = x;
        xp[k] += step;
        xm[k] -= step;
        const double num = (solve_phi(fan, xp).phi - solve_phi(fan, xm).phi) / (2 * step);
        (step == fd ? err_h : err_h2) = std::max(step == fd ? err_h : err_h2, std::abs(num - s.grad[k]));
      }
    }
  }
  rep.add("implicit_residual_max", max_res, "<", 1e-12, Provenance::paper_formula, where);
  rep.add("phi_minus_psi_min", min_gap, ">=", 0.0, Provenance::paper_formula, where);
  rep.add("fitted_C", c_fit, ">", 0.0, Provenance::measured, where + " (lattice fit, 5% margin)");
  rep.add("gap_over_fitted_C_h_max", max_ratio, "<=", 1.0, Provenance::paper_formula, where);
  rep.add("gradient_fd_error_step_1e-3", err_h, "<", 1e-5, Provenance::derived_oracle, where);
  // Second order: halving the step divides the error by about four, until roundoff takes over.
  const double ratio = err_h2 > 0.0 ? err_h / err_h2 : 4.0;
  rep.add("gradient_fd_error_halving_ratio", err_h < 1e-9 ? 4.0 : ratio, ">=", 3.0, Provenance::derived_oracle, where);

  const DirectionFan sym = DirectionFan::symmetric_2d(std::numbers::pi / 3);
  const double zero[1] = {0.0};
  const double expect = std::log(2.0) / std::sin(std::numbers::pi / 3);
  rep.add("symmetric_60deg_value_error", std::abs(solve_phi(sym, zero).phi - expect), "<", 1e-10,
          Provenance::paper_formula, "geometry.solve_phi symmetric 60 degree fan at x = 0");
  return rep;
}

double SurfaceEval::grad_norm2() const {
  double s = 0.0;
  for (double g : grad) s += g * g;
  return s;
}

namespace {

// q_i(x, y) = a_i + b_i y with the x part folded into a_i.
struct Lines {
  std::vector<double> a, b;
  double sum_exp(double y) const {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::exp(-(a[i] + b[i] * y));
    return s;
  }
  // log sum_i e^{-q_i}, stable for large |q|, and its y-derivative.
  double log_sum(double y, double* dy) const {
    double qmin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < a.size(); ++i) qmin = std::min(qmin, a[i] + b[i] * y);
    double s = 0.0, sb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double w = std::exp(-(a[i] + b[i] * y - qmin));
      s += w;
      sb += b[i] * w;
    }
    if (dy) *dy = -sb / s;
    return -qmin + std::log(s);
  }
};

Lines make_lines(const DirectionFan& fan, std::span<const double> x) {
  require(static_cast<int>(x.size()) == fan.xdim(), ErrorCode::invalid_argument, "base point has wrong dimension");
  for (double v : x) require(std::isfinite(v), ErrorCode::invalid_argument, "non-finite base point");
  Lines L;
  for (int i = 0; i < fan.n(); ++i) {
    L.a.push_back(q(fan, i, x, 0.0));
    L.b.push_back(std::sin(fan.theta[i]));
  }
  return L;
}

// Bracket [lo, hi] with log_sum(lo) >= 0 > log_sum(hi).
void bracket(const DirectionFan& fan, const Lines& L, std::span<const double> x, double& lo, double& hi) {
  lo = psi(fan, x);
  hi = lo + 10.0 * fan.n();
  for (int k = 0; k < 60 && L.log_sum(hi, nullptr) >= 0.0; ++k) hi = lo + 2.0 * (hi - lo);
}

}  // namespace

double solve_phi_bisection(const DirectionFan& fan, std::span<const double> x) {
  const Lines L = make_lines(fan, x);
  double lo, hi;
  bracket(fan, L, x, lo, hi);
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (L.log_sum(mid, nullptr) >= 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

SurfaceEval solve_phi(const DirectionFan& fan, std::span<const double> x) {
  const Lines L = make_lines(fan, x);
  double lo, hi;
  bracket(fan, L, x, lo, hi);
  SurfaceEval out;
  double y = std::min(lo + 1.0, 0.5 * (lo + hi));
  bool converged = false;
  for (int it = 0; it < 100; ++it) {
    double dG;
    const double G = L.log_sum(y, &dG);
    out.iterations = it + 1;
    if (G >= 0.0) lo = std::max(lo, y);
    else hi = std::min(hi, y);
    double next = y - G / dG;
    if (!(next > lo && next < hi)) {
      next = 0.5 * (lo + hi);
      out.bisected = true;
    }
    const double step = std::abs(next - y);
    y = next;
    if (step <= 4e-16 * std::max(1.0, std::abs(y)) || hi - lo <= 4e-16 * std::max(1.0, std::abs(y))) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    y = solve_phi_bisection(fan, x);
    out.bisected = true;
  }

  const int n = fan.n(), d = fan.xdim();
  out.phi = y;
  out.qhat.resize(n);
  std::vector<double> E(n);
  double sumE = 0.0, sumEb = 0.0;
  for (int i = 0; i < n; ++i) {
    out.qhat[i] = L.a[i] + L.b[i] * y;
    E[i] = std::exp(-out.qhat[i]);
    sumE += E[i];
    sumEb += E[i] * L.b[i];
  }
  out.residual = std::abs(sumE - 1.0);

  out.grad.assign(d, 0.0);
  for (int k = 0; k < d; ++k) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += E[i] * fan.nu[i][k] * std::cos(fan.theta[i]);
    out.grad[k] = -s / sumEb;
  }
  out.hess.assign(d * d, 0.0);
  std::vector<double> gq(d);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < d; ++k) gq[k] = fan.nu[i][k] * std::cos(fan.theta[i]) + L.b[i] * out.grad[k];
    for (int k = 0; k < d; ++k)
      for (int l = 0; l < d; ++l) out.hess[k * d + l] += E[i] * gq[k] * gq[l] / sumEb;
  }
  double h = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) h += 2.0 * E[i] * E[j];
  out.h = h;
  return out;
}

std::vector<double> e_field(const SurfaceEval& s) {
  const double norm = std::sqrt(1.0 + s.grad_norm2());
  std::vector<double> e(s.grad.size() + 1);
  for (std::size_t k = 0; k < s.grad.size(); ++k) e[k] = -s.grad[k] / norm;
  e.back() = 1.0 / norm;
  return e;
}

std::vector<double> e_field(const DirectionFan& fan, std::span<const double> x, double alpha) {
  require(alpha > 0.0, ErrorCode::invalid_argument, "alpha must be positive");
  std::vector<double> ax(x.begin(), x.end());
  for (double& v : ax) v *= alpha;
  return e_field(solve_phi(fan, ax));
}

FrameCoords frame_coords(const SurfaceEval& s, double chat, double alpha, double t, double y) {
  FrameCoords fc;
  fc.eta = y - chat * t - s.phi / alpha;
  fc.xi = fc.eta / std::sqrt(1.0 + s.grad_norm2());
  return fc;
}

namespace {

SurfaceEval surface_at(const DirectionFan& fan, double alpha, std::span<const double> x) {
  require(alpha > 0.0, ErrorCode::invalid_argument, "alpha must be positive");
  std::vector<double> ax(x.begin(), x.end());
  for (double& v : ax) v *= alpha;
  return solve_phi(fan, ax);
}

}  // namespace

double eta(const DirectionFan& fan, double alpha, double t, std::span<const double> x, double y) {
  require(fan.chat > 0.0, ErrorCode::precondition, "fan speeds not set");
  return frame_coords(surface_at(fan, alpha, x), fan.chat, alpha, t, y).eta;
}

double xi(const DirectionFan& fan, double alpha, double t, std::span<const double> x, double y) {
  require(fan.chat > 0.0, ErrorCode::precondition, "fan speeds not set");
  return frame_coords(surface_at(fan, alpha, x), fan.chat, alpha, t, y).xi;
}

namespace {

double bump(double r) { return std::abs(r) < 1.0 ? std::exp(-1.0 / (1.0 - r * r)) : 0.0; }

constexpr std::array<double, 8> kGLx = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                        -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                        0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> kGLw = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                        0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                        0.2223810344533745, 0.1012285362903763};

double gauss(double a, double b) {
  const double m = 0.5 * (a + b), r = 0.5 * (b - a);
  double s = 0.0;
  for (int k = 0; k < 8; ++k) s += kGLw[k] * bump(m + r * kGLx[k]);
  return s * r;
}

struct OmegaTable {
  static constexpr int cells = 2048;
  std::vector<double> cum;  // integral from -1 to node k
  double total = 0.0;
  OmegaTable() {
    cum.assign(cells + 1, 0.0);
    for (int k = 0; k < cells; ++k) cum[k + 1] = cum[k] + gauss(node(k), node(k + 1));
    total = cum[cells];
  }
  static double node(int k) { return -1.0 + 2.0 * k / cells; }
};

const OmegaTable& omega_table() {
  static const OmegaTable t;
  return t;
}

}  // namespace

OmegaValue omega(double s) {
  OmegaValue o;
  if (std::isnan(s)) fail(ErrorCode::invalid_argument, "omega of NaN");
  if (s <= -1.0) return o;
  if (s >= 1.0) {
    o.w = 1.0;
    return o;
  }
  const auto& T = omega_table();
  const int k = std::clamp(static_cast<int>(std::floor((s + 1.0) * OmegaTable::cells / 2.0)), 0, OmegaTable::cells - 1);
  const double a = OmegaTable::node(k);
  o.w = std::clamp((T.cum[k] + gauss(a, s)) / T.total, 0.0, 1.0);
  const double b = bump(s);
  const double den = 1.0 - s * s;
  o.d1 = b / T.total;
  o.d2 = b * (-2.0 * s / (den * den)) / T.total;
  return o;
}

double g_of_angle(const SpeedMap& map, double a) {
  const double s = std::sin(a);
  require(s > 0.0, ErrorCode::out_of_range, "direction not in the upper half plane");
  return interpolate_speed(map, a) / s;
}

ExperimentReport check_speed_gap(const DirectionFan& fan, const SpeedMap& map, double alpha,
                                 const std::vector<std::vector<double>>& x_samples, double h_floor) {
  require(fan.dim() == 2, ErrorCode::precondition, "speed gap check needs a planar fan");
  require(fan.chat > 0.0, ErrorCode::precondition, "fan speeds not set");
  ExperimentReport rep;
  rep.id = "geometry.check_speed_gap";
  double min_ratio = std::numeric_limits<double>::infinity();
  double min_gap_flat = std::numeric_limits<double>::infinity();
  int used = 0, flat = 0;
  for (const auto& x : x_samples) {
    const SurfaceEval s = surface_at(fan, alpha, x);
    const auto e = e_field(s);
    const double a = std::atan2(e[1], e[0]);
    const double gap = fan.chat * e[1] - interpolate_speed(map, a);
    if (s.h >= h_floor) {
      min_ratio = std::min(min_ratio, gap / s.h);
      ++used;
    } else {
      min_gap_flat = std::min(min_gap_flat, gap);
      ++flat;
    }
  }
  const std::string where = "geometry.check_speed_gap alpha=" + std::to_string(alpha);
  if (used > 0) rep.add("C0_estimate", min_ratio, ">", 0.0, Provenance::measured, where);
  else rep.add_skipped("C0_estimate", Provenance::measured, where);
  if (flat > 0) rep.add("gap_where_h_negligible", min_gap_flat, ">=", -1e-9, Provenance::measured, where);
  rep.add("samples_used", used, ">=", 0.0, Provenance::measured, where);
  return rep;
}

ExperimentReport check_fan_conditions(const DirectionFan& fan, const SpeedMap& map, int samples) {
  require(fan.dim() == 2, ErrorCode::precondition, "condition check implemented for planar fans");
  fan.validate();
  ExperimentReport rep;
  rep.id = "geometry.check_fan_conditions";
  const std::string where = "geometry.check_fan_conditions map[" + std::to_string(map.angles.size()) + "]";
  const int n = fan.n();

  double min_dot = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) min_dot = std::min(min_dot, std::sin(fan.theta[i]));
  rep.add("(i)_min_ei_dot_e0", min_dot, ">", 0.0, Provenance::paper_formula, where);

  std::vector<double> ang(n), gi(n);
  for (int i = 0; i < n; ++i) {
    ang[i] = fan.polar_angle(i);
    gi[i] = g_of_angle(map, ang[i]);
  }
  double chat = 0.0;
  for (double v : gi) chat += v / n;
  double compat = 0.0;
  for (double v : gi) compat = std::max(compat, std::abs(v - chat) / chat);
  rep.add("(ii)_compat_residual", compat, "<", fan.compat_tol, Provenance::paper_formula, where);

  const double amin = *std::min_element(ang.begin(), ang.end());
  const double amax = *std::max_element(ang.begin(), ang.end());
  double min_excess = std::numeric_limits<double>::infinity();
  for (int k = 1; k < samples; ++k) {
    const double a = amin + (amax - amin) * k / samples;
    bool is_fan = false;
    for (double b : ang) is_fan = is_fan || std::abs(a - b) < 1e-12;
    if (is_fan) continue;
    min_excess = std::min(min_excess, (chat - g_of_angle(map, a)) / chat);
  }
  rep.add("(iii)_min_rel_excess", min_excess, ">", 0.0, Provenance::paper_formula, where);

  // g is homogeneous of degree zero, so grad g(e_i) = G'(a_i) (-sin a_i, cos a_i).
  const double lo = map.angles.front(), hi = map.angles.back();
  const double d = 1e-3;
  double max_dot = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double a = ang[i];
    double dG;
    if (a - d >= lo && a + d <= hi) dG = (g_of_angle(map, a + d) - g_of_angle(map, a - d)) / (2 * d);
    else if (a + 2 * d <= hi)
      dG = (-3 * g_of_angle(map, a) + 4 * g_of_angle(map, a + d) - g_of_angle(map, a + 2 * d)) / (2 * d);
    else dG = (3 * g_of_angle(map, a) - 4 * g_of_angle(map, a - d) + g_of_angle(map, a - 2 * d)) / (2 * d);
    for (int j = 0; j < n; ++j)
      if (j != i) max_dot = std::max(max_dot, dG * std::sin(ang[j] - a));
  }
  rep.add("(iv)_max_grad_g_dot_ej", max_dot, "<", 0.0, Provenance::paper_formula, where);
  rep.add("chat", chat, ">", 0.0, Provenance::measured, where);
  return rep;
}

}  // namespace pulsefront
