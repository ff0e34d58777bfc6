#pragma once

#include <memory>
#include <vector>

#include "pulsefront/error.hpp"
#include "pulsefront/grid.hpp"
#include "pulsefront/reaction.hpp"
#include "pulsefront/report.hpp"
#include "pulsefront/spline.hpp"

namespace pulsefront {

enum class Normalization { pointwise, weighted_l2 };
const char* to_string(Normalization n) noexcept;
Normalization normalization_from_string(const std::string& s);

/// Window and resolution of the (s, z) strip on which a profile is computed.
struct StripSpec {
  double s_min = -30.0;
  double s_max = 40.0;
  double ds = 0.125;
  std::vector<int> z_points{8, 8};
};

struct PulsatingOptions {
  double newton_tol = 1e-9;
  int max_newton = 30;
  int max_restarts = 2;
  int ptc_max_steps = 400;
  double ptc_dt0 = 0.5;
  double boundary_tol = 1e-8;
  int max_widenings = 3;
  double widen_step = 8.0;  // length added on a failing side per widening
  int s_order = 4;          // 2 or 4; the Jacobian is always second order in s
};

/// Pulsating front (U_e, c_e) on a strip grid. The stored profile lives on grid coordinates;
/// the normalized profile is U(s, z) = profile(s + s_offset, z).
struct PulsatingFront {
  std::vector<double> e;
  double c = 0.0;
  Field profile;
  Normalization normalization = Normalization::pointwise;
  double epsilon_rho = 0.0;
  double s_offset = 0.0;
  ReactionParams reaction;

  double residual = 0.0;         // sup norm of the discrete profile equation
  double boundary_top = 0.0;     // max_z U at s_max
  double boundary_bottom = 0.0;  // max_z (1 - U) at the first interior row
  int newton_iterations = 0;
  int ptc_steps = 0;
  int widenings = 0;
  int s_order = 4;
  std::size_t phase_node = 0;  // flat torus index of the argmin at s = 0

  // Tail models beyond the strip.
  double tail_kappa2 = 0.0;
  double tail_cminus = 0.0;

  std::shared_ptr<const StripInterpolant> spline;

  double angle() const;  // polar angle of e (N = 2)
};

/// Solves the profile equation jointly for (U, c) under min_z U(0, z) = (1 + theta)/2.
/// `warm` may come from another direction or grid; it only seeds the iteration.
PulsatingFront solve_pulsating_front(const std::vector<double>& e, const Nonlinearity& nl, const StripSpec& strip,
                                     const PulsatingOptions& opts = {}, const PulsatingFront* warm = nullptr);

/// Unit vector (cos a, sin a).
std::vector<double> direction_from_angle(double a);

/// Sup norm of the discrete residual of a stored profile (grid coordinates).
double profile_residual(const PulsatingFront& front, const Nonlinearity& nl);

/// Normalization functional int_{s>0} int_cell U(s + shift)^2 (1 + e^{2 eps s}) ds dz for the
/// normalized profile, including the analytic tail beyond s_max.
double weighted_l2_functional(const PulsatingFront& front, double eps, double extra_shift = 0.0);

struct RenormalizeResult {
  PulsatingFront front;
  double shift = 0.0;  // change of s_offset
};
RenormalizeResult renormalize(const PulsatingFront& front, Normalization mode, double epsilon_rho = 0.0);

/// Normalized U_e(s, z) with periodic wrap in z and exponential tails beyond the strip.
double evaluate_front(const PulsatingFront& front, double s, std::span<const double> z);
double evaluate_front(const PulsatingFront& front, double s, std::span<const double> z, double& ds_value);

struct DecayDiagnostics {
  double lambda_fit = 0.0;
  double lambda_rel_dev = 0.0;
  double ratio_plateau = 0.0;  // mean of d_sU/U over the last decade
  double ratio_rel_dev = 0.0;  // max |d_sU/U + c|/c over the last decade
  double grad_ratio = 0.0;     // max |grad_z U|/U over the fit window
  double c2_sign = 0.0;        // sign of the fitted prefactor of d_sU
  double kbar_ahead = 0.0;     // max_{s>=0} max_z U e^{(3 kappa/4) s}
  double kappa2_fit = 0.0;
  double kbar_behind = 0.0;    // max_{s<=0} max_z (1-U) e^{-kappa2 s}
  int fit_points = 0;
};
/// `kappa` is the speed-map minimum used for the a-priori rate; pass c for a single front.
DecayDiagnostics decay_diagnostics(const PulsatingFront& front, double kappa = 0.0);

/// min over s in [-q, q] (normalized coordinates, nodes only) and the torus of -d_sU.
double interior_slope_bound(const PulsatingFront& front, double q);
/// max over interior nodes of d_sU (negative for a strictly decreasing profile).
double max_interior_ds(const PulsatingFront& front);

struct SpeedMap {
  std::vector<double> angles;
  std::vector<double> speeds;
  std::vector<PulsatingFront> fronts;
  double kappa = 0.0;
  double K = 0.0;
  double max_jump = 0.0;
};

/// Solves every angle in order, warm-starting from the previous one. On failure the partial
/// map is attached to the thrown SpeedMapError.
SpeedMap build_speed_map(const Nonlinearity& nl, const std::vector<double>& angles, const StripSpec& strip,
                         const PulsatingOptions& opts = {}, bool keep_fronts = false);

class SpeedMapError : public Error {
 public:
  SpeedMapError(const Error& cause, SpeedMap partial)
      : Error(cause.code(), cause.what()), partial_(std::move(partial)) {}
  const SpeedMap& partial() const { return partial_; }

 private:
  SpeedMap partial_;
};

/// Speed at angle a by natural cubic interpolation of a speed map over increasing angles.
double interpolate_speed(const SpeedMap& map, double a);

}  // namespace pulsefront
