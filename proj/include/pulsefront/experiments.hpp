#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pulsefront/config.hpp"
#include "pulsefront/evolution.hpp"
#include "pulsefront/fronts.hpp"
#include "pulsefront/pulsating.hpp"
#include "pulsefront/report.hpp"

namespace pulsefront {

/// Speed of the 1D travelling wave U'' + c U' + g(U) = 0 from U = 1 to U = 0, by bisection on c
/// with RK4 integration of the phase-plane slope dp/dU = -c - g(U)/p from the ignition point.
double shooting_speed_1d(const Nonlinearity& nl, double c_lo = 1e-3, double c_hi = 5.0);

struct PulsatingCampaign {
  ExperimentReport report;
  SpeedMap map;
  std::optional<PulsatingFront> front;  // the direction e_0 in the configured medium
};

PulsatingCampaign campaign_pulsating_properties(const RunConfig& cfg);

struct ExistenceCampaign {
  ExperimentReport report;
  bool gated = false;  // the fan failed the conditions and the rest was skipped
  std::shared_ptr<const FrontLibrary> library;
  ScanResult scan;
  std::optional<CurvedFront> front;
  std::optional<ConvergenceReport> convergence;
  double v_star = 0.0;
};

ExistenceCampaign campaign_existence(const RunConfig& cfg);

struct UniquenessCampaign {
  ExperimentReport report;
  double distance = 0.0;       // after alignment
  long best_shift = 0;         // steps
  std::vector<std::string> initializations;
};

/// Reuses the library, scan and curved front of a prior existence campaign when given.
UniquenessCampaign campaign_uniqueness(const RunConfig& cfg, const ExistenceCampaign* prior = nullptr);

struct PerturbationRun {
  std::string family;
  StabilityResult result;
  double T_shift = 0.0;
};

struct StabilityRunCampaign {
  ExperimentReport report;
  AnsatzParams envelope;
  std::vector<PerturbationRun> runs;
};

StabilityRunCampaign campaign_stability(const RunConfig& cfg, const ExistenceCampaign* prior = nullptr);

struct FrontRun {
  ExperimentReport report;
  PulsatingFront front;
};

/// One pulsating front at polar angle `angle` (radians) with its residual, monotonicity and decay checks.
FrontRun run_front(const RunConfig& cfg, double angle);

struct SurfaceRun {
  ExperimentReport report;
  std::vector<double> x, phi, psi, h;  // a line of samples for plotting (N = 2)
};

SurfaceRun run_surface(const RunConfig& cfg, int line_points = 401, double radius = 10.0);

struct SuperRun {
  ExperimentReport report;
  std::optional<AnsatzParams> params;
  std::optional<Field> residual;  // coarse-box residual of the accepted parameters at t = 0
};

SuperRun run_verify_super(const RunConfig& cfg);

struct EvolveRun {
  ExperimentReport report;
  std::optional<CurvedFront> front;
};

/// Evolves on the tracked window from "sub", "super" or a supplied field until the period map
/// settles. A supplied field is interpolated where it covers the window and V-sub fills the rest.
EvolveRun run_evolve(const RunConfig& cfg, const std::string& init, const Field* init_field = nullptr);

/// Random ordered pairs u0 <= v0 with values in [0, 1], stepped side by side on a small box with
/// frozen boundary values; counts order violations, range violations and clamps. Odd pairs run in
/// the comoving frame with a random speed.
ExperimentReport check_comparison_principle(const Nonlinearity& nl, int pairs = 200, int steps = 1000,
                                            std::uint64_t seed = 7, double h = 0.25);

/// Sup distance between two periodic fronts on the same window after the best step shift
/// within half a period. `shift` receives the shift of b relative to a.
double aligned_distance(const PeriodicFront& a, const PeriodicFront& b, long* shift = nullptr);

/// Smooth bump exp(1 - 1/(1 - r^2/R^2)) with peak 1 at the center and support r < R.
double bump(std::span<const double> z, std::span<const double> center, double R);

}  // namespace pulsefront
