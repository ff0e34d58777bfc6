#include "pulsefront/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "pulsefront/error.hpp"
#include "pulsefront/geometry.hpp"
#include "pulsefront/parallel.hpp"

namespace pulsefront {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// Phase-plane slope integration; returns +1 when p reaches zero before U = 1 (c too small).
int shoot(const Nonlinearity& nl, double c) {
  const double theta = nl.theta();
  const int n = 20000;
  const double u_end = 1.0 - 1e-7;
  const double h = (u_end - theta) / n;
  double u = theta, p = -c * theta;
  auto rhs = [&](double uu, double pp) { return -c - nl.g(uu) / pp; };
  for (int i = 0; i < n; ++i) {
    const double k1 = rhs(u, p);
    const double p2 = p + 0.5 * h * k1;
    if (p2 >= 0.0) return 1;
    const double k2 = rhs(u + 0.5 * h, p2);
    const double p3 = p + 0.5 * h * k2;
    if (p3 >= 0.0) return 1;
    const double k3 = rhs(u + 0.5 * h, p3);
    const double p4 = p + h * k3;
    if (p4 >= 0.0) return 1;
    const double k4 = rhs(u + h, p4);
    p += h * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0;
    u += h;
    if (p >= 0.0) return 1;
  }
  return -1;
}

// Values of the normalized profile on the stored strip nodes of `ref`.
double profile_distance(const PulsatingFront& a, const PulsatingFront& b) {
  const Grid& g = *a.profile.grid;
  std::vector<double> x(g.dim());
  double d = 0.0;
  const double lo = std::max(a.profile.grid->axis(0).lo - a.s_offset, b.profile.grid->axis(0).lo - b.s_offset) + 1.0;
  const double hi = std::min(a.profile.grid->axis(0).hi() - a.s_offset, b.profile.grid->axis(0).hi() - b.s_offset) - 1.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.coords(i, x);
    const double s = x[0] - a.s_offset;
    if (s < lo || s > hi) continue;
    const std::span<const double> z(x.data() + 1, x.size() - 1);
    d = std::max(d, std::abs(evaluate_front(a, s, z) - evaluate_front(b, s, z)));
  }
  return d;
}

std::vector<double> circle_angles(int n) {
  std::vector<double> a;
  for (int k = 0; k < n; ++k) a.push_back(2.0 * std::numbers::pi * k / n);
  return a;
}

std::vector<double> e0(int N) {
  std::vector<double> e(N, 0.0);
  e.back() = 1.0;
  return e;
}

double min_over_box(const GridPtr& g, const std::function<double(std::span<const double>)>& fn) {
  std::vector<double> z(g->dim());
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < g->size(); ++i) {
    g->coords(i, z);
    m = std::min(m, fn(z));
  }
  return m;
}

}  // namespace

double shooting_speed_1d(const Nonlinearity& nl, double c_lo, double c_hi) {
  require(shoot(nl, c_lo) > 0 && shoot(nl, c_hi) < 0, ErrorCode::not_bracketed,
          "shooting speed not bracketed by the initial interval");
  for (int it = 0; it < 200 && c_hi - c_lo > 1e-13; ++it) {
    const double mid = 0.5 * (c_lo + c_hi);
    (shoot(nl, mid) > 0 ? c_lo : c_hi) = mid;
  }
  return 0.5 * (c_lo + c_hi);
}

double bump(std::span<const double> z, std::span<const double> center, double R) {
  double r2 = 0.0;
  for (std::size_t k = 0; k < z.size(); ++k) r2 += (z[k] - center[k]) * (z[k] - center[k]);
  const double q = r2 / (R * R);
  if (q >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - q));
}

PulsatingCampaign campaign_pulsating_properties(const RunConfig& cfg) {
  const auto t0 = Clock::now();
  PulsatingCampaign out;
  ExperimentReport& rep = out.report;
  rep.id = "pulsating";
  rep.config_digest = cfg.digest;
  const Nonlinearity nl(cfg.reaction);
  const int N = nl.dim();

  rep.merge(verify_hypotheses(nl, cfg.hypotheses), "hypotheses");

  // Homogeneous medium against the phase-plane shooting speed, at two strip spacings.
  {
    ReactionParams hp = cfg.reaction;
    hp.mode = AmplitudeMode::homogeneous;
    hp.level = 1.0;
    const Nonlinearity hn(hp);
    const double oracle = shooting_speed_1d(hn);
    StripSpec s1 = cfg.strip;
    s1.z_points.assign(N, 1);
    StripSpec s2 = s1;
    s2.ds = s1.ds / 2;
    const auto f1 = solve_pulsating_front(e0(N), hn, s1, cfg.solver);
    const auto f2 = solve_pulsating_front(e0(N), hn, s2, cfg.solver, &f1);
    const std::string where = "pulsating.solve_pulsating_front homogeneous, ds " + std::to_string(s2.ds);
    rep.add("homogeneous_vs_shooting_rel", rel(f2.c, oracle), "<", 0.01, Provenance::derived_oracle, where);
    rep.add("homogeneous_refinement_rel", rel(f1.c, f2.c), "<", 0.003, Provenance::measured, where);
  }

  // Profile properties along e_0.
  const auto front = solve_pulsating_front(e0(N), nl, cfg.strip, cfg.solver);
  {
    const std::string where = "pulsating.solve_pulsating_front e_0 on " + front.profile.grid->describe();
    rep.add("residual_sup", front.residual, "<", cfg.solver.newton_tol, Provenance::trivial, where);
    rep.add("boundary_top", front.boundary_top, "<", cfg.solver.boundary_tol, Provenance::trivial, where);
    rep.add("boundary_bottom", front.boundary_bottom, "<", cfg.solver.boundary_tol, Provenance::trivial, where);
    rep.add("speed", front.c, ">", 0.0, Provenance::paper_formula, where);
    rep.add("max_interior_ds", max_interior_ds(front), "<", 0.0, Provenance::paper_formula, where);
    const Grid& g = *front.profile.grid;
    const std::size_t row = g.size() / static_cast<std::size_t>(g.axis(0).count);
    const int r0 = static_cast<int>(std::lround(-g.axis(0).lo / g.axis(0).spacing));
    double mn = 1.0;
    for (std::size_t j = 0; j < row; ++j) mn = std::min(mn, front.profile.values[r0 * row + j]);
    rep.add("phase_value_error", std::abs(mn - 0.5 * (1.0 + nl.theta())), "<=", 1e-12, Provenance::paper_formula, where);
    const auto dd = decay_diagnostics(front);
    rep.add("decay_rate_rel_dev", dd.lambda_rel_dev, "<", 0.05, Provenance::paper_formula, where);
    rep.add("ds_ratio_rel_dev", dd.ratio_rel_dev, "<", 0.05, Provenance::paper_formula, where);
    rep.add("grad_z_ratio_over_c", dd.grad_ratio / front.c, "<", 0.1, Provenance::paper_formula, where);
    rep.add("ds_prefactor_sign", dd.c2_sign, "<", 0.0, Provenance::paper_formula, where);
    rep.add("kbar_ahead", dd.kbar_ahead, "<", 1e6, Provenance::paper_formula, where);
    rep.add("kbar_behind", dd.kbar_behind, "<", 1e6, Provenance::paper_formula, where);
    const double r1 = interior_slope_bound(front, 1.0), r2 = interior_slope_bound(front, 2.0);
    rep.add("slope_bound_q1", r1, ">", 0.0, Provenance::paper_formula, where);
    rep.add("slope_bound_monotone_in_q", r2 - r1, "<=", 0.0, Provenance::trivial, where);

    const auto p = renormalize(front, Normalization::pointwise);
    rep.add("pointwise_renormalize_shift", std::abs(p.shift), "<=", 1e-12, Provenance::trivial, where);
  }

  // Speed map over the circle and its refinement.
  {
    const int n = cfg.speed_map_directions;
    out.map = build_speed_map(nl, circle_angles(n), cfg.strip, cfg.solver);
    const SpeedMap fine = build_speed_map(nl, circle_angles(2 * n), cfg.strip, cfg.solver);
    const std::string where = "pulsating.build_speed_map " + std::to_string(n) + " directions";
    rep.add("kappa", out.map.kappa, ">", 0.0, Provenance::paper_formula, where);
    if (cfg.reaction.mode != AmplitudeMode::sine_product && N == 2) {
      // x -> -x symmetry pairs the angles a and pi - a.
      double worst = 0.0;
      for (int k = 0; k < n; ++k) {
        const int mirror = ((n / 2 - k) % n + n) % n;
        if (2 * k == n / 2 || k == mirror) continue;
        if ((n / 2) * 2 != n) break;
        worst = std::max(worst, rel(out.map.speeds[k], out.map.speeds[mirror]));
      }
      rep.add("mirror_speed_rel_diff", worst, "<", 1e-6, Provenance::derived_oracle, where);
    } else {
      rep.add_skipped("mirror_speed_rel_diff", Provenance::derived_oracle, where + " (medium not mirror symmetric)");
    }
    const double ratio = out.map.max_jump > 0.0 ? fine.max_jump / out.map.max_jump : 0.0;
    rep.add("jump_ratio_under_halving_lo", ratio, ">=", 0.35, Provenance::paper_formula, where);
    rep.add("jump_ratio_under_halving_hi", ratio, "<=", 0.65, Provenance::paper_formula, where);
  }

  // Weighted normalization and continuity of e -> U_e.
  {
    const double eps = cfg.library.epsilon_rho_factor * out.map.kappa;
    const auto w1 = renormalize(front, Normalization::weighted_l2, eps);
    const auto w2 = renormalize(w1.front, Normalization::weighted_l2, eps);
    const std::string where = "pulsating.renormalize weighted_l2 eps " + std::to_string(eps);
    rep.add("weighted_functional_error", std::abs(weighted_l2_functional(w1.front, eps) - 1.0), "<", 1e-8,
            Provenance::derived_oracle, where);
    rep.add("weighted_second_shift", std::abs(w2.shift), "<", 1e-10, Provenance::trivial, where);

    if (N == 2) {
      const double a0 = std::numbers::pi / 2;
      std::vector<double> dist;
      for (int k = 0; k < 3; ++k) {
        const double d = cfg.continuity_delta / std::pow(2.0, k);
        const auto fd = solve_pulsating_front(direction_from_angle(a0 + d), nl, cfg.strip, cfg.solver, &front);
        dist.push_back(profile_distance(front, fd));
      }
      const std::string wc = "pulsating.solve_pulsating_front angles pi/2 + delta";
      rep.add("continuity_dist_decreases_1", dist[1] - dist[0], "<", 0.0, Provenance::paper_formula, wc);
      rep.add("continuity_dist_decreases_2", dist[2] - dist[1], "<", 0.0, Provenance::paper_formula, wc);
    }
  }
  out.front = front;
  rep.wall_seconds = seconds_since(t0);
  return out;
}

ExistenceCampaign campaign_existence(const RunConfig& cfg) {
  const auto t0 = Clock::now();
  ExistenceCampaign out;
  ExperimentReport& rep = out.report;
  rep.id = "existence";
  rep.config_digest = cfg.digest;
  const Nonlinearity nl(cfg.reaction);
  DirectionFan fan = cfg.fan;
  fan.validate();

  auto lib = std::make_shared<FrontLibrary>(build_front_library(nl, fan, cfg.library));
  out.library = lib;
  rep.merge(check_fan_conditions(lib->fan, lib->speed_map()), "conditions");
  if (!rep.passed()) {
    out.gated = true;
    rep.add_skipped("supersolution_scan", Provenance::trivial, "experiments.campaign_existence (conditions failed)");
    rep.add_skipped("curved_front", Provenance::trivial, "experiments.campaign_existence (conditions failed)");
    rep.wall_seconds = seconds_since(t0);
    return out;
  }

  // Supersolution certificate.
  out.scan = scan_supersolution(lib, nl, cfg.scan);
  const std::string ws = "fronts.scan_supersolution";
  rep.add_flag("scan_found", out.scan.found, Provenance::paper_formula, ws);
  if (!out.scan.found) {
    rep.add_skipped("curved_front", Provenance::trivial, "experiments.campaign_existence (no supersolution)");
    rep.wall_seconds = seconds_since(t0);
    return out;
  }
  const AnsatzParams sp = out.scan.params;
  for (std::size_t k = 0; k < out.scan.certificates.size(); ++k) {
    const Certificate& c = out.scan.certificates[k];
    const std::string tag = "t" + std::to_string(k) + ".";
    const std::string where = "fronts.certify on " + c.coarse.grid;
    rep.add(tag + "coarse_min_residual_plus_tol", c.coarse.min_residual + c.coarse.tol, ">=", 0.0,
            Provenance::paper_formula, where);
    rep.add(tag + "fine_min_residual_plus_scaled_tol", c.fine.min_residual + c.fine.tol, ">=", 0.0,
            Provenance::paper_formula, "fronts.certify on " + c.fine.grid);
  }
  {
    const BoxSpec box = super_box(*lib, sp, cfg.scan, 0.0);
    const Ansatz sup(AnsatzKind::super, lib, sp);
    const double order = min_over_box(box.grid(), [&](std::span<const double> z) {
      return eval_super(*lib, sp, 0.0, z) - eval_sub(*lib, 0.0, z);
    });
    rep.add("super_minus_sub_min", order, ">=", 0.0, Provenance::paper_formula, "fronts.eval_super on the certificate box");
    std::vector<double> times;
    for (double t : cfg.scan.times) times.push_back(t * nl.cell().lengths.back() / lib->fan.chat);
    rep.merge(verify_monotone_super(sup, box, times), "monotone");
    const std::vector<std::vector<double>> xs = [&] {
      std::vector<std::vector<double>> v;
      for (int i = -40; i <= 40; ++i) v.push_back({0.25 * i / sp.alpha});
      return v;
    }();
    rep.merge(check_speed_gap(lib->fan, lib->speed_map(), sp.alpha, xs), "speed_gap");
  }

  // Curved front from V-sub.
  out.front = build_curved_front(lib, nl, &sp, cfg.curved);
  const CurvedFront& cf = *out.front;
  const std::string wc = "evolution.build_curved_front on " + cf.vhat.window->base()->describe();
  rep.add("period_delta_final", cf.final_delta, "<", cfg.curved.conv_tol, Provenance::paper_formula, wc);
  rep.add("shift_identity_residual", cf.identity_residual, "<", cfg.curved.conv_tol, Provenance::paper_formula, wc);
  rep.add("sandwich_u_minus_sub_min", cf.sandwich_low, ">=", -cfg.curved.conv_tol, Provenance::paper_formula, wc);
  rep.add("sandwich_u_minus_super_max", cf.sandwich_high, "<=", cfg.curved.conv_tol, Provenance::paper_formula, wc);
  rep.add("vhat_min_time_increment", cf.min_time_increment, ">", 0.0, Provenance::paper_formula, wc);
  rep.add("interior_clamps", static_cast<double>(cf.clamps.clamped_interior), "==", 0.0, Provenance::trivial, wc);

  const double c3 = estimate_c3(lib->fan);
  out.v_star = v_star_estimate(*lib, sp.beta, c3);
  rep.add("surface_c3", c3, ">=", 0.0, Provenance::measured, "geometry.estimate_c3 on |x| <= 20");
  const int m = cf.vhat.window->steps_per_period();
  const Field v0 = cf.vhat.at_step(cf.steps - m);
  out.convergence = measure_gap_decay(v0, v0.time, *lib, out.v_star, nullptr, cfg.bin_width, cfg.far_tol,
                                             cfg.edge_margin);
  rep.merge(out.convergence->report, "gap_decay");

  // Bracket with V-bar boundary data, reported for the record.
  CurvedFrontOptions bo = cfg.curved;
  bo.boundary = BoundarySource::super;
  bo.check_sandwich = false;
  const CurvedFront upper = build_curved_front(lib, nl, &sp, bo);
  const auto gap = bracket_gap(cf.vhat, upper.vhat);
  std::size_t trusted = 0;
  for (double g : gap) trusted += g < 10.0 * cfg.curved.conv_tol;
  rep.add("bracket_trusted_fraction", static_cast<double>(trusted) / static_cast<double>(gap.size()), ">=", 0.0,
          Provenance::measured, "evolution.bracket_gap sub vs super boundary data");
  rep.add("bracket_upper_minus_lower_min", *std::min_element(gap.begin(), gap.end()), ">=", 0.0, Provenance::measured,
          "evolution.bracket_gap sub vs super boundary data");
  rep.wall_seconds = seconds_since(t0);
  return out;
}

FrontRun run_front(const RunConfig& cfg, double angle) {
  const auto t0 = Clock::now();
  const Nonlinearity nl(cfg.reaction);
  require(nl.dim() == 2, ErrorCode::invalid_argument, "front directions by angle need N = 2");
  FrontRun out{ExperimentReport{}, solve_pulsating_front(direction_from_angle(angle), nl, cfg.strip, cfg.solver)};
  ExperimentReport& rep = out.report;
  rep.id = "front";
  rep.config_digest = cfg.digest;
  const PulsatingFront& f = out.front;
  const std::string where = "pulsating.solve_pulsating_front on " + f.profile.grid->describe();
  rep.add("speed", f.c, ">", 0.0, Provenance::paper_formula, where);
  rep.add("residual_sup", f.residual, "<", cfg.solver.newton_tol, Provenance::trivial, where);
  rep.add("boundary_top", f.boundary_top, "<", cfg.solver.boundary_tol, Provenance::trivial, where);
  rep.add("boundary_bottom", f.boundary_bottom, "<", cfg.solver.boundary_tol, Provenance::trivial, where);
  rep.add("max_interior_ds", max_interior_ds(f), "<", 0.0, Provenance::paper_formula, where);
  try {
    const auto dd = decay_diagnostics(f);
    rep.add("decay_rate_rel_dev", dd.lambda_rel_dev, "<", 0.05, Provenance::paper_formula, where);
    rep.add("ds_ratio_rel_dev", dd.ratio_rel_dev, "<", 0.05, Provenance::paper_formula, where);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::fit_window_empty) throw;
    rep.add_skipped("decay_rate_rel_dev", Provenance::paper_formula, where + " (" + e.what() + ")");
  }
  rep.wall_seconds = seconds_since(t0);
  return out;
}

SurfaceRun run_surface(const RunConfig& cfg, int line_points, double radius) {
  const auto t0 = Clock::now();
  DirectionFan fan = cfg.fan;
  fan.validate();
  SurfaceRun out;
  out.report = check_surface(fan);
  out.report.config_digest = cfg.digest;
  if (fan.xdim() == 1) {
    require(line_points >= 2, ErrorCode::invalid_argument, "surface line needs two points");
    for (int i = 0; i < line_points; ++i) {
      const double x[1] = {-radius + 2.0 * radius * i / (line_points - 1)};
      const SurfaceEval s = solve_phi(fan, x);
      out.x.push_back(x[0]);
      out.phi.push_back(s.phi);
      out.psi.push_back(psi(fan, x));
      out.h.push_back(s.h);
    }
  }
  out.report.wall_seconds = seconds_since(t0);
  return out;
}

SuperRun run_verify_super(const RunConfig& cfg) {
  const auto t0 = Clock::now();
  SuperRun out;
  ExperimentReport& rep = out.report;
  rep.id = "verify_super";
  rep.config_digest = cfg.digest;
  const Nonlinearity nl(cfg.reaction);
  DirectionFan fan = cfg.fan;
  fan.validate();
  auto lib = std::make_shared<FrontLibrary>(build_front_library(nl, fan, cfg.library));
  const ScanResult scan = scan_supersolution(lib, nl, cfg.scan);
  rep.add_flag("scan_found", scan.found, Provenance::paper_formula, "fronts.scan_supersolution");
  if (scan.found) {
    out.params = scan.params;
    for (std::size_t k = 0; k < scan.certificates.size(); ++k) {
      const Certificate& c = scan.certificates[k];
      const std::string tag = "t" + std::to_string(k) + ".";
      rep.add(tag + "coarse_min_residual_plus_tol", c.coarse.min_residual + c.coarse.tol, ">=", 0.0,
              Provenance::paper_formula, "fronts.certify on " + c.coarse.grid);
      rep.add(tag + "fine_min_residual_plus_tol", c.fine.min_residual + c.fine.tol, ">=", 0.0,
              Provenance::paper_formula, "fronts.certify on " + c.fine.grid);
    }
    const BoxSpec box = super_box(*lib, scan.params, cfg.scan, 0.0);
    const Ansatz sup(AnsatzKind::super, lib, scan.params);
    const ResidualReport r = residual(sup, nl, box.grid(), 0.0);
    out.residual = Field(box.grid(), r.values, 0.0);
    const double order = min_over_box(box.grid(), [&](std::span<const double> z) {
      return eval_super(*lib, scan.params, 0.0, z) - eval_sub(*lib, 0.0, z);
    });
    rep.add("super_minus_sub_min", order, ">=", 0.0, Provenance::paper_formula, "fronts.eval_super on " + r.grid);
    std::vector<double> times;
    for (double t : cfg.scan.times) times.push_back(t * nl.cell().lengths.back() / lib->fan.chat);
    rep.merge(verify_monotone_super(sup, box, times), "monotone");
  }
  rep.wall_seconds = seconds_since(t0);
  return out;
}

EvolveRun run_evolve(const RunConfig& cfg, const std::string& init, const Field* init_field) {
  const auto t0 = Clock::now();
  EvolveRun out;
  ExperimentReport& rep = out.report;
  rep.id = "evolve";
  rep.config_digest = cfg.digest;
  require(init == "sub" || init == "super" || (init == "file" && init_field), ErrorCode::invalid_argument,
          "init must be sub, super or a field");
  const Nonlinearity nl(cfg.reaction);
  DirectionFan fan = cfg.fan;
  fan.validate();
  auto lib = std::make_shared<FrontLibrary>(build_front_library(nl, fan, cfg.library));
  std::optional<AnsatzParams> sp;
  if (init == "super") {
    const ScanResult scan = scan_supersolution(lib, nl, cfg.scan);
    require(scan.found, ErrorCode::no_convergence, "no supersolution parameters passed the scan");
    sp = scan.params;
  }
  CurvedFrontOptions o = cfg.curved;
  o.check_sandwich = init != "file";
  FieldFn fn;
  if (init == "super") {
    const AnsatzParams p = *sp;
    fn = [lib, p](double t, std::span<const double> z) { return std::min(1.0, eval_super(*lib, p, t, z)); };
  } else if (init == "file") {
    require(init_field->grid && init_field->grid->dim() == nl.dim(), ErrorCode::grid_mismatch,
            "initial field has the wrong dimension");
    const Field f = *init_field;
    fn = [lib, f](double t, std::span<const double> z) {
      const Grid& g = *f.grid;
      for (int k = 0; k < g.dim(); ++k) {
        const Axis& a = g.axis(k);
        if (!a.periodic && (z[k] < a.lo || z[k] > a.hi())) return eval_sub(*lib, t, z);
      }
      return interpolate(f, z);
    };
  }
  out.front = build_curved_front(lib, nl, sp ? &*sp : nullptr, o, fn, init);
  const CurvedFront& cf = *out.front;
  const std::string where = "evolution.build_curved_front on " + cf.vhat.window->base()->describe();
  rep.add("period_delta_final", cf.final_delta, "<", o.conv_tol, Provenance::paper_formula, where);
  rep.add("shift_identity_residual", cf.identity_residual, "<", o.conv_tol, Provenance::paper_formula, where);
  rep.add("interior_clamps", static_cast<double>(cf.clamps.clamped_interior), "==", 0.0, Provenance::trivial, where);
  if (init == "sub") {
    rep.add("sandwich_u_minus_sub_min", cf.sandwich_low, ">=", -o.conv_tol, Provenance::paper_formula, where);
    rep.add("vhat_min_time_increment", cf.min_time_increment, ">", 0.0, Provenance::paper_formula, where);
  } else if (init == "super") {
    rep.add("sandwich_u_minus_sub_min", cf.sandwich_low, ">=", -o.conv_tol, Provenance::paper_formula, where);
    rep.add("sandwich_u_minus_super_max", cf.sandwich_high, "<=", o.conv_tol, Provenance::paper_formula, where);
  }
  rep.add("periods", static_cast<double>(cf.period_deltas.size()), ">=", 1.0, Provenance::measured, where);
  rep.wall_seconds = seconds_since(t0);
  return out;
}

ExperimentReport check_comparison_principle(const Nonlinearity& nl, int pairs, int steps, std::uint64_t seed,
                                            double h) {
  require(pairs >= 1 && steps >= 1 && h > 0.0, ErrorCode::invalid_argument, "comparison check needs pairs and steps");
  const auto t0 = Clock::now();
  ExperimentReport rep;
  rep.id = "comparison";
  const int N = nl.dim();
  const int n = static_cast<int>(std::lround(2.0 / h));
  const GridPtr box =
      Grid::box(std::vector<double>(N, -1.0), std::vector<double>(N, 1.0), std::vector<int>(N, 2 * n + 1),
                BoundaryPolicy::dirichlet_from_field);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::size_t order = 0, range = 0, clamps = 0;
  double worst = 0.0;
  for (int p = 0; p < pairs; ++p) {
    CauchyConfig cc;
    cc.box = box;
    cc.boundary_source = BoundarySource::frozen_initial;
    if (p % 2 == 1) {
      cc.frame = Frame::comoving;
      cc.chat = 2.0 * unif(rng);
    }
    Field u(box), v(box);
    // Half the pairs are rough nodal noise, half are steps around the ignition level.
    const bool rough = (p / 2) % 2 == 0;
    const double level = unif(rng);
    for (std::size_t i = 0; i < box->size(); ++i) {
      const double a = rough ? unif(rng) : std::clamp(level + 0.2 * (unif(rng) - 0.5), 0.0, 1.0);
      const double b = std::min(1.0, a + (unif(rng) < 0.3 ? 0.0 : 0.3 * unif(rng)));
      u.values[i] = a;
      v.values[i] = b;
    }
    StepStats su, sv;
    double t = 0.0;
    for (int k = 0; k < steps; ++k) {
      u = step(u, t, cc, nl, {}, &su);
      v = step(v, t, cc, nl, {}, &sv);
      t = u.time;
      for (std::size_t i = 0; i < box->size(); ++i) {
        const double d = u.values[i] - v.values[i];
        if (d > 0.0) ++order, worst = std::max(worst, d);
        if (u.values[i] < 0.0 || u.values[i] > 1.0 || v.values[i] < 0.0 || v.values[i] > 1.0) ++range;
      }
    }
    clamps += su.clamped_interior + sv.clamped_interior;
  }
  const std::string where = "evolution.step on " + box->describe() + ", " + std::to_string(pairs) + " pairs x " +
                            std::to_string(steps) + " steps";
  rep.add("order_violations", static_cast<double>(order), "==", 0.0, Provenance::paper_formula, where);
  rep.add("largest_violation", worst, "==", 0.0, Provenance::paper_formula, where);
  rep.add("range_violations", static_cast<double>(range), "==", 0.0, Provenance::paper_formula, where);
  rep.add("interior_clamps", static_cast<double>(clamps), "==", 0.0, Provenance::trivial, where);
  rep.wall_seconds = seconds_since(t0);
  return rep;
}

double aligned_distance(const PeriodicFront& a, const PeriodicFront& b, long* shift) {
  require(a.window && b.window && a.window->base()->same_as(*b.window->base()) &&
              a.window->steps_per_period() == b.window->steps_per_period(),
          ErrorCode::grid_mismatch, "fronts live on different windows");
  const int m = a.window->steps_per_period();
  auto sup = [](const std::vector<double>& x, const std::vector<double>& y) {
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) d = std::max(d, std::abs(x[i] - y[i]));
    return d;
  };
  double best = sup(a.phases[0], b.phases[0]);
  long arg = 0;
  for (int p = 1; p <= m / 2; ++p) {
    const double plus = sup(a.phases[0], b.phases[p]);
    const double minus = sup(a.phases[p], b.phases[0]);
    if (plus < best) best = plus, arg = p;
    if (minus < best) best = minus, arg = -p;
  }
  if (shift) *shift = arg;
  return best;
}

namespace {

struct Prepared {
  std::shared_ptr<const FrontLibrary> lib;
  AnsatzParams sp;
  std::optional<CurvedFront> base;
};

Prepared prepare(const RunConfig& cfg, const Nonlinearity& nl, const ExistenceCampaign* prior) {
  Prepared p;
  if (prior && prior->library && prior->scan.found) {
    p.lib = prior->library;
    p.sp = prior->scan.params;
    if (prior->front) p.base = prior->front;
    return p;
  }
  DirectionFan fan = cfg.fan;
  fan.validate();
  auto lib = std::make_shared<FrontLibrary>(build_front_library(nl, fan, cfg.library));
  p.lib = lib;
  const ScanResult scan = scan_supersolution(lib, nl, cfg.scan);
  require(scan.found, ErrorCode::no_convergence, "no supersolution parameters passed the scan");
  p.sp = scan.params;
  return p;
}

}  // namespace

UniquenessCampaign campaign_uniqueness(const RunConfig& cfg, const ExistenceCampaign* prior) {
  const auto t0 = Clock::now();
  UniquenessCampaign out;
  ExperimentReport& rep = out.report;
  rep.id = "uniqueness";
  rep.config_digest = cfg.digest;
  const Nonlinearity nl(cfg.reaction);
  Prepared p = prepare(cfg, nl, prior);
  const auto lib = p.lib;
  const AnsatzParams sp = p.sp;
  CurvedFrontOptions o = cfg.curved;
  o.conv_tol = cfg.uniqueness_conv_tol;
  o.check_sandwich = false;

  FieldFn sub = [lib](double t, std::span<const double> z) { return eval_sub(*lib, t, z); };
  FieldFn mid = [lib, sp](double t, std::span<const double> z) {
    return std::min(1.0, 0.5 * (eval_sub(*lib, t, z) + eval_super(*lib, sp, t, z)));
  };
  const double half = 0.5 * nl.cell().lengths.back() / lib->fan.chat;
  FieldFn ahead = [lib, half](double t, std::span<const double> z) { return eval_sub(*lib, t + half, z); };

  const CurvedFront a = build_curved_front(lib, nl, &sp, o, sub, "sub");
  const CurvedFront b = build_curved_front(lib, nl, &sp, o, mid, "midpoint");
  const CurvedFront a2 = build_curved_front(lib, nl, &sp, o, sub, "sub");
  const CurvedFront c = build_curved_front(lib, nl, &sp, o, ahead, "sub_half_period_ahead");
  out.initializations = {"sub", "midpoint", "sub", "sub_half_period_ahead"};
  const std::string where = "evolution.build_curved_front on " + a.vhat.window->base()->describe();
  for (const CurvedFront* f : {&a, &b, &c})
    rep.add("converged_" + f->trajectory.initial_id, f->final_delta, "<", o.conv_tol, Provenance::measured, where);
  out.distance = aligned_distance(a.vhat, b.vhat, &out.best_shift);
  const double tol = 10.0 * cfg.curved.conv_tol;
  rep.add("sub_vs_midpoint_distance", out.distance, "<", tol, Provenance::derived_oracle, where);
  rep.add("sub_vs_midpoint_best_shift_steps", static_cast<double>(out.best_shift), ">=",
          -static_cast<double>(a.vhat.window->steps_per_period()), Provenance::measured, where);
  rep.add("sub_vs_sub_distance", aligned_distance(a.vhat, a2.vhat), "==", 0.0, Provenance::trivial, where);
  long shift_c = 0;
  rep.add("sub_vs_shifted_init_distance", aligned_distance(a.vhat, c.vhat, &shift_c), "<", tol,
          Provenance::paper_formula, where);
  rep.wall_seconds = seconds_since(t0);
  return out;
}

StabilityRunCampaign campaign_stability(const RunConfig& cfg, const ExistenceCampaign* prior) {
  const auto t0 = Clock::now();
  StabilityRunCampaign out;
  ExperimentReport& rep = out.report;
  rep.id = "stability";
  rep.config_digest = cfg.digest;
  const Nonlinearity nl(cfg.reaction);
  Prepared p = prepare(cfg, nl, prior);
  const auto lib = p.lib;
  const AnsatzParams sp = p.sp;
  if (!p.base) p.base = build_curved_front(lib, nl, &sp, cfg.curved);
  const CurvedFront& base = *p.base;
  const PeriodicFront& vhat = base.vhat;
  const Grid& g = *vhat.window->base();

  // Envelope parameters: delta from gamma_star, lambda from the branch speed and kappa1, varrho scanned.
  AnsatzParams env = sp;
  env.delta = cfg.stability.delta_fraction * nl.gamma_star();
  const double ci = lib->fan.speeds[sp.branch];
  env.lambda = std::min(sp.beta * lib->fan.chat * ci / 16.0, nl.kappa1() / 4.0);
  bool env_ok = false;
  for (double rho : cfg.stability.varrho) {
    env.varrho = rho;
    env.T = 0.0;
    const Ansatz w(AnsatzKind::w_plus, lib, env);
    const Certificate cert = certify(w, nl, super_box(*lib, env, cfg.scan, 0.0), 0.0);
    if (cert.pass_coarse && cert.pass_fine) {
      env_ok = true;
      break;
    }
  }
  rep.add_flag("envelope_certificate", env_ok, Provenance::paper_formula,
               "fronts.certify W_delta^+ at t = 0, varrho " + std::to_string(env.varrho));

  // Perturbation families; all supported at least edge_margin away from the window edge.
  const double v = 0.5 * v_star_estimate(*lib, sp.beta, estimate_c3(lib->fan));
  const double A = cfg.stability.amplitude;
  const double reach = std::max(0.5, g.axis(0).hi() - cfg.edge_margin);  // largest |x| a bump may touch
  const PulsatingFront& b0 = lib->branch(0);
  const std::vector<double> e_0 = lib->fan.direction(0);
  struct Family {
    std::string name;
    std::function<double(std::span<const double>, double)> fn;  // (z, V-sub) -> u0
  };
  const double R1 = std::min(2.0, reach);
  const double xf = 0.6 * reach, yf = xf / std::tan(lib->fan.theta[0]);
  const double Rf = std::min(0.9 * (reach - xf), 1.0);
  std::vector<Family> fams = {
      {"ridge_bump",
       [&](std::span<const double> z, double s) {
         const double c[2] = {0.0, 0.0};
         return std::min(1.0, s + A * bump(z, c, R1));
       }},
      {"ahead_bump",
       [&](std::span<const double> z, double s) {
         const double c[2] = {0.0, 2.5};
         return std::min(1.0, s + A * bump(z, c, R1));
       }},
      {"facet_bump",
       [&](std::span<const double> z, double s) {
         const double c[2] = {-xf, yf};
         return std::min(1.0, s + A * bump(z, c, Rf));
       }},
      {"branch_inflation",
       [&, e_0](std::span<const double> z, double s) {
         const double c[2] = {-0.5 * reach, 0.5 * reach / std::tan(lib->fan.theta[0])};
         const double adv = 1.0 * bump(z, c, 0.45 * reach);
         const double arg = z[0] * e_0[0] + z[1] * e_0[1] - adv;
         return std::max(s, evaluate_front(b0, arg, z));
       }},
      {"super_blend",
       [&](std::span<const double> z, double s) {
         const double c[2] = {0.0, 0.0};
         return std::min(1.0, s + bump(z, c, R1) * std::max(0.0, eval_super(*lib, sp, 0.0, z) - s));
       }},
      {"dip_below_sub",
       [&](std::span<const double> z, double s) {
         const double c[2] = {0.0, 0.0};
         return std::max(0.0, s - A * bump(z, c, R1));
       }},
  };

  std::vector<double> sub0(g.size());
  std::vector<double> z(g.dim());
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.coords(i, z);
    sub0[i] = eval_sub(*lib, 0.0, z);
  }
  out.envelope = env;
  for (const Family& f : fams) {
    std::vector<double> u0(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      g.coords(i, z);
      u0[i] = f.fn(z, sub0[i]);
    }
    // Smallest reference time T with W(0) >= u0 on the window.
    AnsatzParams e = env;
    double T = 0.0;
    for (; T <= 40.0; T += 0.5) {
      e.T = T;
      bool above = true;
      for (std::size_t i = 0; i < g.size() && above; ++i) {
        g.coords(i, z);
        above = eval_envelope(*lib, AnsatzKind::w_plus, e, {}, 0.0, z) >= u0[i];
      }
      if (above) break;
    }
    StabilityOptions so;
    so.stab_tol = cfg.stability.stab_tol;
    so.T_final = cfg.stability.T_final;
    so.v = v;
    so.outer_band = cfg.edge_margin;
    so.check_envelope = T <= 40.0;
    so.envelope = e;
    so.envelope_tol = cfg.stability.envelope_tol;
    PerturbationRun run;
    run.family = f.name;
    run.T_shift = T;
    run.result = run_stability(vhat, lib, nl, u0, so, f.name);
    rep.merge(run.result.report, f.name);
    if (run.result.accepted && !so.check_envelope)
      rep.add_flag(f.name + ".envelope_time_shift_found", false, Provenance::measured, "experiments.campaign_stability");
    out.runs.push_back(std::move(run));
  }
  std::size_t accepted = 0;
  for (const auto& r : out.runs) accepted += r.result.accepted;
  rep.add("accepted_families", static_cast<double>(accepted), ">=", 5.0, Provenance::trivial,
          "experiments.campaign_stability");
  rep.wall_seconds = seconds_since(t0);
  return out;
}

}  // namespace pulsefront
