#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pulsefront/pulsating.hpp"
#include "pulsefront/report.hpp"

namespace pulsefront {

/// Directions e_i = (nu_i cos theta_i, sin theta_i) bounding the polytope Q = {min_i q_i >= 0}.
struct DirectionFan {
  std::vector<std::vector<double>> nu;  // unit vectors in R^{N-1}
  std::vector<double> theta;            // angles in (0, pi/2]
  std::vector<double> speeds;           // c_{e_i}, empty until filled
  double chat = 0.0;
  double compat_tol = 1e-3;

  int n() const { return static_cast<int>(theta.size()); }
  int xdim() const { return nu.empty() ? 0 : static_cast<int>(nu.front().size()); }
  int dim() const { return xdim() + 1; }
  std::vector<double> direction(int i) const;
  /// Polar angle of e_i in the plane (N = 2 only).
  double polar_angle(int i) const;

  /// Throws invalid_argument when the fan is malformed.
  void validate() const;
  /// Stores the speeds and sets chat to the mean of c_i / sin theta_i.
  void set_speeds(std::vector<double> c);
  /// max_i |c_i / sin theta_i - chat| / chat.
  double compat_residual() const;

  /// N = 2 fan with nu = -1, +1 and a common angle.
  static DirectionFan symmetric_2d(double theta);
};

double q(const DirectionFan& fan, int i, std::span<const double> x, double y);
double psi(const DirectionFan& fan, std::span<const double> x);

struct SurfaceEval {
  double phi = 0.0;
  std::vector<double> grad;  // N-1
  std::vector<double> hess;  // (N-1)^2, row-major
  double h = 0.0;
  std::vector<double> qhat;
  double residual = 0.0;  // |sum_i e^{-qhat_i} - 1|
  int iterations = 0;
  bool bisected = false;

  double grad_norm2() const;
};

/// Root of sum_i e^{-q_i(x, y)} = 1 with implicit first and second derivatives.
SurfaceEval solve_phi(const DirectionFan& fan, std::span<const double> x);
/// The same root by plain bisection, for cross-checking.
double solve_phi_bisection(const DirectionFan& fan, std::span<const double> x);

/// sup over sampled x in [-radius, radius]^(N-1) of min_i |grad phi(x) + nu_i cot theta_i| / h(x).
/// N = 2 samples a line; higher dimensions sample a lattice with `samples` points per axis.
double estimate_c3(const DirectionFan& fan, double radius = 20.0, int samples = 801);

/// Unit normal field e(x) built from the surface at alpha*x.
std::vector<double> e_field(const DirectionFan& fan, std::span<const double> x, double alpha);
std::vector<double> e_field(const SurfaceEval& s);

/// Moving-frame coordinates at a point whose surface data at alpha*x is `s`.
struct FrameCoords {
  double eta = 0.0;
  double xi = 0.0;
};
FrameCoords frame_coords(const SurfaceEval& s, double chat, double alpha, double t, double y);
double eta(const DirectionFan& fan, double alpha, double t, std::span<const double> x, double y);
double xi(const DirectionFan& fan, double alpha, double t, std::span<const double> x, double y);

struct OmegaValue {
  double w = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};
/// Smooth step: normalized integral of exp(-1/(1-r^2)) over (-1, s).
OmegaValue omega(double s);

/// Minimum over samples of (chat/sqrt(1+|grad phi(alpha x)|^2) - c_{e(x)}) / h(alpha x).
/// Samples where h falls below `h_floor` only enter the check that the gap is not negative.
ExperimentReport check_speed_gap(const DirectionFan& fan, const SpeedMap& map, double alpha,
                                 const std::vector<std::vector<double>>& x_samples, double h_floor = 1e-10);

/// Conditions (i)-(iv) for a planar fan against a speed map (N = 2).
ExperimentReport check_fan_conditions(const DirectionFan& fan, const SpeedMap& map, int samples = 400);

/// Surface checks on `samples` uniform random x in [-radius, radius]^(N-1) drawn from `seed`:
/// implicit residual, phi >= psi, |phi - psi| <= C h with C fitted on a lattice, analytic
/// gradient against centered differences at two steps, and the symmetric 60 degree value at x = 0.
ExperimentReport check_surface(const DirectionFan& fan, int samples = 10000, std::uint64_t seed = 1,
                               double radius = 10.0);

/// g(e) = c_e / (e . e_0) at polar angle a.
double g_of_angle(const SpeedMap& map, double a);

}  // namespace pulsefront
