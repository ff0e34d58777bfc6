#include "pulsefront/reaction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "pulsefront/error.hpp"

namespace pulsefront {

void PeriodCell::validate() const {
  require(lengths.size() >= 2, ErrorCode::invalid_argument, "period cell needs dimension >= 2");
  for (double L : lengths)
    require(std::isfinite(L) && L > 0.0, ErrorCode::invalid_argument, "period lengths must be positive");
}

const char* to_string(AmplitudeMode m) noexcept {
  switch (m) {
    case AmplitudeMode::sine_product: return "sine_product";
    case AmplitudeMode::even: return "even";
    case AmplitudeMode::homogeneous: return "homogeneous";
  }
  return "sine_product";
}

AmplitudeMode amplitude_mode_from_string(const std::string& s) {
  if (s == "sine_product" || s == "default") return AmplitudeMode::sine_product;
  if (s == "even") return AmplitudeMode::even;
  if (s == "homogeneous") return AmplitudeMode::homogeneous;
  fail(ErrorCode::config, "unknown amplitude mode '" + s + "'");
}

Nonlinearity::Nonlinearity(ReactionParams params) : params_(std::move(params)) {
  const auto& p = params_;
  require(std::isfinite(p.theta) && p.theta > 0.0 && p.theta < 1.0, ErrorCode::invalid_argument,
          "reaction.theta must lie in (0,1)");
  require(std::isfinite(p.sigma) && p.sigma > 0.0, ErrorCode::invalid_argument,
          "reaction.sigma must be positive");
  p.cell.validate();
  if (p.mode == AmplitudeMode::homogeneous) {
    require(std::isfinite(p.level) && p.level >= 0.0, ErrorCode::invalid_argument,
            "homogeneous level must be nonnegative");
    a_min_ = a_max_ = p.level;
  } else {
    require(std::isfinite(p.modulation) && p.modulation >= 0.0 && p.modulation < 1.0,
            ErrorCode::invalid_argument, "amplitude modulation must lie in [0,1)");
    // Every factor reaches +-1 on the cell, so the extremes are attained.
    a_min_ = 1.0 - p.modulation;
    a_max_ = 1.0 + p.modulation;
  }

  const double gp1 = g_u(1.0);  // < 0
  kappa1_ = -a_min_ * gp1;
  K1_ = -a_max_ * gp1;

  // Largest admissible gamma from a dense scan of the worst case a = a_min (a > 0 scales
  // both sides of the inequality equally, so the condition reduces to g'(u) <= g'(1)/2).
  const double cap = std::min(p.theta / 2.0, 1.0 - p.theta);
  if (kappa1_ > 0.0) {
    const int n = 20000;
    double good = 0.0;
    for (int k = 1; k <= n; ++k) {
      const double gam = cap * k / n;
      if (g_u(1.0 - gam) > 0.5 * gp1) break;
      good = gam;
    }
    gamma_star_ = 0.5 * good;
  }

  double gmax = std::abs(gp1);
  const int n = 200000;
  for (int k = 1; k < n; ++k) {
    const double u = p.theta + (1.0 - p.theta) * k / n;
    gmax = std::max(gmax, std::abs(g_u(u)));
  }
  lipschitz_ = a_max_ * gmax;
}

double Nonlinearity::amplitude(std::span<const double> z) const {
  const auto& p = params_;
  if (p.mode == AmplitudeMode::homogeneous) return p.level;
  const auto& L = p.cell.lengths;
  double prod = 1.0;
  for (std::size_t k = 0; k < L.size() && k < z.size(); ++k) {
    // Reduce to [0, L) first so that shifts by whole periods give bitwise identical values.
    double r = std::fmod(z[k], L[k]);
    if (r < 0.0) r += L[k];
    const double arg = 2.0 * std::numbers::pi * r / L[k];
    prod *= (k == 0 && p.mode == AmplitudeMode::even) ? std::cos(arg) : std::sin(arg);
  }
  return 1.0 + p.modulation * prod;
}

double Nonlinearity::g(double u) const {
  const double th = params_.theta;
  if (u <= th) return 0.0;
  if (u >= 1.0) return g_u(1.0) * (u - 1.0);
  return std::exp(-params_.sigma / (u - th)) * (1.0 - u);
}

double Nonlinearity::g_u(double u) const {
  const double th = params_.theta, sg = params_.sigma;
  if (u <= th) return 0.0;
  const double uu = std::min(u, 1.0);
  const double v = uu - th;
  const double E = std::exp(-sg / v);
  return E * (sg * (1.0 - uu) / (v * v) - 1.0);
}

double Nonlinearity::g_uu(double u) const {
  const double th = params_.theta, sg = params_.sigma;
  if (u <= th || u >= 1.0) return 0.0;
  const double v = u - th;
  const double E = std::exp(-sg / v);
  const double E1 = sg / (v * v) * E;
  const double E2 = (sg * sg / (v * v * v * v) - 2.0 * sg / (v * v * v)) * E;
  return E2 * (1.0 - u) - 2.0 * E1;
}

void Nonlinearity::check_finite(std::span<const double> z, double u) const {
  bool ok = std::isfinite(u);
  for (double v : z) ok = ok && std::isfinite(v);
  require(ok, ErrorCode::invalid_argument, "non-finite argument to the reaction term");
}

double Nonlinearity::f_at(double a, double u) const {
  if (u < 0.0) return 0.0;
  return a * g(u);
}

double Nonlinearity::f_u_at(double a, double u) const {
  if (u <= 0.0) return 0.0;
  return a * g_u(u);
}

double Nonlinearity::f(std::span<const double> z, double u) const {
  check_finite(z, u);
  return f_at(amplitude(z), u);
}

double Nonlinearity::f_u(std::span<const double> z, double u) const {
  check_finite(z, u);
  return f_u_at(amplitude(z), u);
}

namespace {

// Calls fn(z) on a tensor grid of `m` points per dimension covering one cell.
template <class Fn>
void for_each_cell_point(const PeriodCell& cell, int m, Fn&& fn) {
  const int N = cell.dim();
  std::vector<int> idx(N, 0);
  std::vector<double> z(N);
  while (true) {
    for (int d = 0; d < N; ++d) z[d] = cell.lengths[d] * idx[d] / m;
    fn(std::span<const double>(z));
    int d = N - 1;
    while (d >= 0 && ++idx[d] == m) idx[d--] = 0;
    if (d < 0) break;
  }
}

}  // namespace

ExperimentReport verify_hypotheses(const Nonlinearity& nl, const HypothesisSample& sample) {
  ExperimentReport rep;
  rep.id = "reaction.verify_hypotheses";
  const double th = nl.theta();
  const int nu = std::max(sample.u_points, 2);
  std::vector<double> us;
  for (int k = 0; k < nu; ++k) us.push_back(sample.u_min + (sample.u_max - sample.u_min) * k / (nu - 1));
  // The hypotheses single out u in [0,theta], u = 1 and u = theta+; make sure they are sampled.
  us.push_back(0.0);
  us.push_back(th);
  us.push_back(1.0);
  std::sort(us.begin(), us.end());

  double max_abs_zero_band = 0.0;
  double min_f_mid = std::numeric_limits<double>::infinity();
  std::vector<double> max_over_z(us.size(), -std::numeric_limits<double>::infinity());
  double sup_fu1 = -std::numeric_limits<double>::infinity();
  double inf_fu1 = std::numeric_limits<double>::infinity();
  double max_tail_excess = -std::numeric_limits<double>::infinity();
  double lip_ratio = 0.0;
  bool periodic = true;
  const double gs = nl.gamma_star();
  const double k1 = nl.kappa1();
  const auto& L = nl.cell().lengths;

  for_each_cell_point(nl.cell(), sample.z_points, [&](std::span<const double> z) {
    std::vector<double> zs(z.begin(), z.end());
    for (std::size_t d = 0; d < zs.size(); ++d) zs[d] += L[d];
    const double fu1 = nl.f_u(z, 1.0);
    sup_fu1 = std::max(sup_fu1, fu1);
    inf_fu1 = std::min(inf_fu1, fu1);
    double prev_u = 0.0, prev_f = 0.0;
    for (std::size_t k = 0; k < us.size(); ++k) {
      const double u = us[k];
      const double fv = nl.f(z, u);
      if ((u >= 0.0 && u <= th) || u == 1.0) max_abs_zero_band = std::max(max_abs_zero_band, std::abs(fv));
      if (u > th && u < 1.0) min_f_mid = std::min(min_f_mid, fv);
      max_over_z[k] = std::max(max_over_z[k], fv);
      if (u >= 1.0 - gs) max_tail_excess = std::max(max_tail_excess, nl.f_u(z, u) + k1 / 2.0);
      if (nl.f(zs, u) != fv) periodic = false;
      if (k > 0 && u > prev_u) {
        lip_ratio = std::max(lip_ratio, std::abs(fv - prev_f) / (u - prev_u));
      }
      prev_u = u;
      prev_f = fv;
    }
  });

  double min_max_mid = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < us.size(); ++k)
    if (us[k] > th && us[k] < 1.0) min_max_mid = std::min(min_max_mid, max_over_z[k]);

  const std::string where = "reaction.verify_hypotheses on cell grid";
  rep.add("f_zero_on_[0,theta]_and_1", max_abs_zero_band, "==", 0.0, Provenance::paper_formula, where);
  rep.add("f_nonnegative_on_(theta,1)", min_f_mid, ">=", 0.0, Provenance::paper_formula, where);
  rep.add("f_positive_somewhere_each_u", min_max_mid, ">", 0.0, Provenance::paper_formula, where);
  rep.add("kappa1_positive", -sup_fu1, ">", 0.0, Provenance::measured, where);
  rep.add("K1_ge_kappa1", -inf_fu1 - (-sup_fu1), ">=", 0.0, Provenance::measured, where);
  rep.add("K1_finite", std::isfinite(inf_fu1) ? 1.0 : 0.0, "==", 1.0, Provenance::measured, where);
  rep.add("gamma_star_positive", gs, ">", 0.0, Provenance::measured, where);
  rep.add("fu_tail_le_minus_kappa1_half", max_tail_excess, "<=", 0.0, Provenance::paper_formula, where);
  rep.add_flag("periodic_in_z", periodic, Provenance::paper_formula, where);
  rep.add("lipschitz_in_u", lip_ratio, "<=", nl.lipschitz() * (1.0 + 1e-12), Provenance::measured, where);
  // Bare measured constants, reported for downstream use.
  rep.add("kappa1", -sup_fu1, ">=", -std::numeric_limits<double>::infinity(), Provenance::measured, where);
  rep.add("K1", -inf_fu1, ">=", -std::numeric_limits<double>::infinity(), Provenance::measured, where);
  rep.add("gamma_star", gs, ">=", -std::numeric_limits<double>::infinity(), Provenance::measured, where);
  return rep;
}

}  // namespace pulsefront
