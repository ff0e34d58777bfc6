// Acceptance suite: one line per criterion at the default configuration.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pulsefront/config.hpp"
#include "pulsefront/experiments.hpp"
#include "pulsefront/geometry.hpp"
#include "pulsefront/pulsating.hpp"
#include "pulsefront/reaction.hpp"

using namespace pulsefront;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Line {
  bool ok = true;
  std::string detail;

  void need(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail += (detail.empty() ? "" : "; ") + std::string("FAILED ") + what;
    }
  }
  void note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
  void checks(const ExperimentReport& r, const std::vector<std::string>& names) {
    for (const auto& n : names) {
      const Check* c = r.find(n);
      if (!c) {
        need(false, n + " missing");
        continue;
      }
      char buf[160];
      std::snprintf(buf, sizeof buf, "%s=%.4g", n.c_str(), c->measured);
      need(c->status == CheckStatus::pass, buf);
      if (c->status == CheckStatus::pass) note(buf);
    }
  }
  void runtime(double seconds, double budget) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.1f s (budget %.0f s)", seconds, budget);
    need(seconds < budget, std::string("runtime ") + buf);
    if (seconds < budget) note(buf);
  }
};

int failures = 0;

void report_line(int n, const std::string& title, const std::function<Line()>& body) {
  Line l;
  try {
    l = body();
  } catch (const std::exception& e) {
    l.ok = false;
    l.detail = std::string("error: ") + e.what();
  }
  if (!l.ok) ++failures;
  std::printf("criterion %2d %s: %s | %s\n", n, l.ok ? "PASS" : "FAIL", title.c_str(), l.detail.c_str());
  std::fflush(stdout);
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

int main() {
  const RunConfig cfg = default_config();
  const Nonlinearity nl(cfg.reaction);
  const int N = nl.dim();
  std::vector<double> e0(N, 0.0);
  e0.back() = 1.0;

  report_line(1, "nonlinearity hypotheses", [&] {
    Line l;
    const auto t0 = Clock::now();
    const auto r = verify_hypotheses(nl, cfg.hypotheses);
    const double s = since(t0);
    l.need(cfg.hypotheses.z_points == 64 && cfg.hypotheses.u_points == 200, "sample is 64x64x200");
    l.need(r.passed(), "verify_hypotheses");
    l.checks(r, {"kappa1_positive", "fu_tail_le_minus_kappa1_half"});
    l.runtime(s, 1.0);
    return l;
  });

  report_line(2, "homogeneous speed against the shooting oracle", [&] {
    Line l;
    const auto t0 = Clock::now();
    ReactionParams hp = cfg.reaction;
    hp.mode = AmplitudeMode::homogeneous;
    hp.level = 1.0;
    const Nonlinearity hn(hp);
    const double oracle = shooting_speed_1d(hn);
    StripSpec s1 = cfg.strip;
    s1.z_points.assign(N, 1);
    StripSpec s2 = s1;
    s2.ds = s1.ds / 2;
    const auto f1 = solve_pulsating_front(e0, hn, s1, cfg.solver);
    const auto f2 = solve_pulsating_front(e0, hn, s2, cfg.solver, &f1);
    char buf[200];
    std::snprintf(buf, sizeof buf, "oracle %.9f, c(ds) %.9f, c(ds/2) %.9f", oracle, f1.c, f2.c);
    l.note(buf);
    std::snprintf(buf, sizeof buf, "refined vs oracle %.3g < 1e-2", rel(f2.c, oracle));
    l.need(rel(f2.c, oracle) < 0.01, buf);
    std::snprintf(buf, sizeof buf, "refinement change %.3g < 3e-3", rel(f1.c, f2.c));
    l.need(rel(f1.c, f2.c) < 0.003, buf);
    l.runtime(since(t0), 120.0);
    return l;
  });

  report_line(3, "profile properties along e_0", [&] {
    Line l;
    const auto t0 = Clock::now();
    const auto fr = solve_pulsating_front(e0, nl, cfg.strip, cfg.solver);
    const double ds = max_interior_ds(fr);
    char buf[200];
    std::snprintf(buf, sizeof buf, "max interior d_sU %.3g < 0", ds);
    l.need(ds < 0.0, buf);
    if (ds < 0.0) l.note(buf);
    // Minimum over the torus nodes of the normalized profile at s = 0.
    const auto& g = *fr.profile.grid;
    std::vector<int> m(N);
    std::vector<double> z(N);
    double mn = 1e300;
    const std::size_t row = g.size() / static_cast<std::size_t>(g.axis(0).count);
    for (std::size_t j = 0; j < row; ++j) {
      std::size_t r = j;
      for (int k = N; k >= 1; --k) {
        m[k - 1] = static_cast<int>(r % g.axis(k).count);
        r /= g.axis(k).count;
      }
      for (int k = 0; k < N; ++k) z[k] = g.axis(k + 1).coord(m[k]);
      mn = std::min(mn, evaluate_front(fr, 0.0, z));
    }
    const double target = 0.5 * (1.0 + nl.theta());
    std::snprintf(buf, sizeof buf, "|min_z U(0,z) - (1+theta)/2| %.3g", std::abs(mn - target));
    l.need(std::abs(mn - target) <= 1e-12, buf);
    if (std::abs(mn - target) <= 1e-12) l.note(buf);
    const auto d = decay_diagnostics(fr);
    std::snprintf(buf, sizeof buf, "decay fit rel dev %.3g < 0.05", d.lambda_rel_dev);
    l.need(d.lambda_rel_dev < 0.05, buf);
    if (d.lambda_rel_dev < 0.05) l.note(buf);
    std::snprintf(buf, sizeof buf, "d_sU/U plateau rel dev %.3g < 0.05", d.ratio_rel_dev);
    l.need(d.ratio_rel_dev < 0.05, buf);
    if (d.ratio_rel_dev < 0.05) l.note(buf);
    l.runtime(since(t0), 60.0);
    return l;
  });

  report_line(4, "speed map", [&] {
    Line l;
    const auto pc = campaign_pulsating_properties(cfg);
    l.note(std::to_string(cfg.speed_map_directions) + " directions");
    l.checks(pc.report, {"kappa", "mirror_speed_rel_diff", "jump_ratio_under_halving_lo", "jump_ratio_under_halving_hi"});
    l.need(pc.report.passed(), "pulsating campaign (" + std::to_string(pc.report.failures()) + " failed checks)");
    l.runtime(pc.report.wall_seconds, 600.0);
    return l;
  });

  report_line(5, "smoothing surface", [&] {
    Line l;
    const auto t0 = Clock::now();
    const auto r = check_surface(cfg.fan, 10000);
    const double s = since(t0);
    l.checks(r, {"implicit_residual_max", "phi_minus_psi_min", "gap_over_fitted_C_h_max", "gradient_fd_error_halving_ratio",
                 "symmetric_60deg_value_error"});
    l.need(r.passed(), "surface report");
    l.runtime(s, 5.0);
    return l;
  });

  std::optional<ExistenceCampaign> existence;
  report_line(6, "supersolution certificate", [&] {
    Line l;
    existence = campaign_existence(cfg);
    l.need(!existence->gated, "fan conditions gate");
    l.checks(existence->report, {"scan_found", "t0.coarse_min_residual_plus_tol", "t0.fine_min_residual_plus_scaled_tol",
                                 "super_minus_sub_min", "monotone.min_dVdt"});
    if (existence->scan.found) {
      char buf[120];
      std::snprintf(buf, sizeof buf, "beta %.3g eps %.3g alpha %.4g", existence->scan.params.beta,
                    existence->scan.params.epsilon, existence->scan.params.alpha);
      l.note(buf);
    }
    l.runtime(existence->report.wall_seconds, 600.0);
    return l;
  });

  report_line(7, "discrete comparison principle", [&] {
    Line l;
    const auto r = check_comparison_principle(nl, 200, 1000);
    l.checks(r, {"order_violations", "range_violations", "interior_clamps"});
    l.runtime(r.wall_seconds, 120.0);
    return l;
  });

  report_line(8, "curved front existence", [&] {
    Line l;
    if (!existence) existence = campaign_existence(cfg);
    l.checks(existence->report, {"sandwich_u_minus_sub_min", "sandwich_u_minus_super_max", "period_delta_final",
                                 "shift_identity_residual", "gap_decay.farthest_bin_max",
                                 "gap_decay.bin_maxima_increases_after_peak"});
    l.need(existence->report.passed(), "existence report (" + std::to_string(existence->report.failures()) + " failed)");
    l.runtime(existence->report.wall_seconds, 1200.0);
    return l;
  });

  report_line(9, "uniqueness", [&] {
    Line l;
    const auto u = campaign_uniqueness(cfg, existence ? &*existence : nullptr);
    l.checks(u.report, {"sub_vs_midpoint_distance", "sub_vs_shifted_init_distance"});
    l.need(u.distance < 1e-5, "aligned distance below 1e-5");
    l.need(u.report.passed(), "uniqueness report");
    l.runtime(u.report.wall_seconds, 1200.0);
    return l;
  });

  report_line(10, "stability", [&] {
    Line l;
    const auto s = campaign_stability(cfg, existence ? &*existence : nullptr);
    l.checks(s.report, {"envelope_certificate", "accepted_families"});
    int accepted = 0;
    for (const auto& run : s.runs) {
      if (!run.result.accepted) continue;
      ++accepted;
      l.checks(s.report, {run.family + ".final_distance_to_vhat", run.family + ".decreasing_from_record",
                          run.family + ".max_u_minus_w_plus"});
    }
    l.need(accepted >= 5, "five accepted perturbation families");
    l.need(s.report.passed(), "stability report");
    l.runtime(s.report.wall_seconds, 1800.0);
    return l;
  });

  std::printf("acceptance: %d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
