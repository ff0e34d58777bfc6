#pragma once

#include <span>
#include <string>
#include <vector>

#include "pulsefront/report.hpp"

namespace pulsefront {

/// Lengths L_1..L_N of the periodicity cell.
struct PeriodCell {
  std::vector<double> lengths{1.0, 1.0};

  int dim() const { return static_cast<int>(lengths.size()); }
  void validate() const;
};

/// Shape of the periodic coefficient a(z).
///   sine_product: a = 1 + m * prod_k sin(2 pi z_k / L_k)
///   even:         a = 1 + m * cos(2 pi z_1 / L_1) * prod_{k>1} sin(2 pi z_k / L_k)
///                 (invariant under z_1 -> -z_1)
///   homogeneous:  a = level
enum class AmplitudeMode { sine_product, even, homogeneous };

const char* to_string(AmplitudeMode m) noexcept;
AmplitudeMode amplitude_mode_from_string(const std::string& s);

struct ReactionParams {
  double theta = 0.3;
  double sigma = 0.2;
  AmplitudeMode mode = AmplitudeMode::sine_product;
  double modulation = 0.5;
  double level = 1.0;
  PeriodCell cell;
};

/// Periodic combustion nonlinearity f(z,u) = a(z) g(u) with
/// g(u) = exp(-sigma/(u-theta)) (1-u) on (theta,1], g = 0 below theta,
/// and the linear continuation f(z,u) = f_u(z,1)(u-1) for u >= 1.
class Nonlinearity {
 public:
  /// Throws Error(invalid_argument) unless theta in (0,1), sigma > 0, a valid cell,
  /// and 0 <= modulation < 1.
  explicit Nonlinearity(ReactionParams params);

  const ReactionParams& params() const { return params_; }
  const PeriodCell& cell() const { return params_.cell; }
  int dim() const { return params_.cell.dim(); }
  double theta() const { return params_.theta; }

  double amplitude(std::span<const double> z) const;

  double g(double u) const;
  double g_u(double u) const;
  double g_uu(double u) const;

  double f(std::span<const double> z, double u) const;
  double f_u(std::span<const double> z, double u) const;

  /// Variants taking a precomputed amplitude a(z); used in stencil sweeps.
  double f_at(double a, double u) const;
  double f_u_at(double a, double u) const;

  double amplitude_min() const { return a_min_; }
  double amplitude_max() const { return a_max_; }

  /// kappa1 = -sup_z f_u(z,1), K1 = -inf_z f_u(z,1).
  double kappa1() const { return kappa1_; }
  double K1() const { return K1_; }
  /// Half of the largest gamma <= min(theta/2, 1-theta) for which f_u <= -kappa1/2
  /// on [1-gamma, 1+gamma], found on a fine u-grid.
  double gamma_star() const { return gamma_star_; }
  /// sup_{z,u} |f_u(z,u)|.
  double lipschitz() const { return lipschitz_; }

 private:
  void check_finite(std::span<const double> z, double u) const;

  ReactionParams params_;
  double a_min_ = 0, a_max_ = 0;
  double kappa1_ = 0, K1_ = 0, gamma_star_ = 0, lipschitz_ = 0;
};

struct HypothesisSample {
  int z_points = 64;  // per cell dimension
  int u_points = 200;
  double u_min = -0.5;
  double u_max = 2.0;
};

/// Checks the combustion hypotheses on a sample grid covering one cell and [u_min,u_max].
/// Failures are reported, never thrown.
ExperimentReport verify_hypotheses(const Nonlinearity& nl, const HypothesisSample& sample = {});

}  // namespace pulsefront
