#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "pulsefront/geometry.hpp"
#include "pulsefront/grid.hpp"
#include "pulsefront/pulsating.hpp"
#include "pulsefront/reaction.hpp"
#include "pulsefront/report.hpp"
#include "pulsefront/spline.hpp"

namespace pulsefront {

struct FrontLibraryOptions {
  StripSpec strip;
  PulsatingOptions solver;
  int lattice_intervals = 8;      // per gap between consecutive fan angles
  double epsilon_rho_factor = 0.1;  // epsilon of the weighted normalization = factor * min speed
};

/// Pulsating fronts on a direction lattice covering the range of e(x), all under one
/// weighted normalization. The fan directions are lattice nodes.
struct FrontLibrary {
  DirectionFan fan;  // speeds and chat filled
  double epsilon_rho = 0.0;
  std::vector<double> angles;
  std::vector<PulsatingFront> fronts;
  std::vector<int> branch_index;
  std::shared_ptr<const CardinalSpline> spline;
  double kappa = 0.0;  // min speed over the lattice
  double kappa2 = 0.0;  // min behind-decay rate over the branches

  const PulsatingFront& branch(int i) const { return fronts[branch_index[i]]; }
  /// U_e(s, z) for the direction at polar angle a, interpolated across the lattice.
  double lattice_value(double a, double s, std::span<const double> z) const;
  /// Clamps a into the lattice range; throws out_of_range if it lies clearly outside.
  double clamp_angle(double a) const;
  SpeedMap speed_map() const;
};

FrontLibrary build_front_library(const Nonlinearity& nl, DirectionFan fan, const FrontLibraryOptions& opts = {});

/// Assembles a library from fronts solved elsewhere; they are renormalized here.
FrontLibrary assemble_front_library(DirectionFan fan, std::vector<double> angles, std::vector<PulsatingFront> fronts,
                                    double epsilon_rho);

enum class AnsatzKind { sub, super, w_plus, v_plus, v_minus };
const char* to_string(AnsatzKind k) noexcept;

struct AnsatzParams {
  double alpha = 0.25;
  double epsilon = 0.05;
  double beta = 0.5;
  int branch = 0;  // the fixed e_i of the correction term
  double delta = 0.0;
  double lambda = 0.0;
  double varrho = 0.0;
  double T = 0.0;  // reference time of the base field
};

/// Space-time field, used for stored curved fronts.
using FieldFn = std::function<double(double t, std::span<const double> z)>;

/// max_i U_{e_i}(z . e_i - c_i t, z). `which` receives the attaining branch.
double eval_sub(const FrontLibrary& lib, double t, std::span<const double> z, int* which = nullptr);

/// U_{e(x)}(xi, z) + eps h(alpha x) [U_{e_i}^beta(eta, z) omega(xi) + 1 - omega(xi)].
double eval_super(const FrontLibrary& lib, const AnsatzParams& p, double t, std::span<const double> z);

/// U_{e_i}^beta(eta, z) omega(xi) + 1 - omega(xi) at time t.
double correction_term(const FrontLibrary& lib, const AnsatzParams& p, double t, std::span<const double> z);

/// W_delta^+, V_delta^+ and V_delta^- with their retarded times. The v kinds read `base`.
double eval_envelope(const FrontLibrary& lib, AnsatzKind kind, const AnsatzParams& p, const FieldFn& base,
                     double t, std::span<const double> z);

class Ansatz {
 public:
  Ansatz(AnsatzKind kind, std::shared_ptr<const FrontLibrary> lib, AnsatzParams params, FieldFn base = {});
  double operator()(double t, std::span<const double> z) const;
  AnsatzKind kind() const { return kind_; }
  const AnsatzParams& params() const { return params_; }
  const FrontLibrary& library() const { return *lib_; }
  std::shared_ptr<const FrontLibrary> library_ptr() const { return lib_; }

 private:
  AnsatzKind kind_;
  std::shared_ptr<const FrontLibrary> lib_;
  AnsatzParams params_;
  FieldFn base_;
};

struct ResidualReport {
  double min_residual = 0.0;
  double max_residual = 0.0;
  std::vector<double> argmin;  // (x, y)
  double t = 0.0;
  double tol = 0.0;
  std::string grid;
  AnsatzParams params;
  std::size_t nodes = 0;
  std::size_t skipped = 0;
  std::vector<double> values;  // residual per box node (NaN where skipped)
};

/// L u = du/dt - Lap u - f(z, u) at every node of `box`, du/dt by centered differences with
/// step dt and the Laplacian by the 5-point stencil. Sub ansaetze skip nodes whose stencil
/// sees more than one maximizing branch.
ResidualReport residual(const Ansatz& u, const Nonlinearity& nl, const GridPtr& box, double t, double dt = 1e-4);

/// Axis-aligned box [x_lo, x_hi] x [y_lo, y_hi] sampled with spacing h.
struct BoxSpec {
  double x_lo = -4.0, x_hi = 4.0;
  double y_lo = -8.0, y_hi = 12.0;
  double h = 0.125;
  GridPtr grid() const;
  BoxSpec refined() const;
  BoxSpec shifted(double dy) const;
};

struct Certificate {
  ResidualReport coarse;
  ResidualReport fine;
  double tol_disc = 0.0;       // for the coarse grid
  double tol_space = 0.0;
  double tol_time = 0.0;
  bool pass_coarse = false;
  bool pass_fine = false;  // fine min residual >= -1.5 tol_disc / 4
};

/// Residual sign test with tol_disc from the change between spacings h and h/2 and
/// between time steps dt and dt/2 (Richardson).
Certificate certify(const Ansatz& u, const Nonlinearity& nl, const BoxSpec& box, double t, double dt = 1e-4);

struct ScanOptions {
  std::vector<double> betas{1.0, 0.5, 0.25};
  double epsilon0 = 0.1;
  int epsilon_levels = 5;
  double alpha0 = 0.5;
  double alpha_factor = 0.5;
  double alpha_floor = 1e-3;
  int branch = 0;
  double half_width = 4.0;  // x in [-half_width, half_width]
  double below = 8.0;       // box reaches this far below min psi
  double above = 10.0;      // and this far above max phi(alpha x)/alpha
  double h = 0.125;
  std::vector<double> times{0.0};  // in units of L_N / chat
};

struct ScanRow {
  double beta = 0.0, epsilon = 0.0, alpha = 0.0;
  double t = 0.0;
  double min_residual = 0.0;
  double tol_disc = 0.0;
  bool pass = false;
};

struct ScanResult {
  std::vector<ScanRow> trace;
  bool found = false;
  AnsatzParams params;
  std::vector<Certificate> certificates;  // one per time of the accepted parameters
};

/// Verification box for the super ansatz at time t.
BoxSpec super_box(const FrontLibrary& lib, const AnsatzParams& p, const ScanOptions& o, double t);

/// beta over `betas`, then epsilon halving, then alpha decreasing until the certificate passes.
ScanResult scan_supersolution(std::shared_ptr<const FrontLibrary> lib, const Nonlinearity& nl,
                              const ScanOptions& opts = {});
std::string scan_trace_csv(const ScanResult& r);

/// Centered time difference of V-bar at every node for each sample time; reports the minimum
/// and the change under step halving.
ExperimentReport verify_monotone_super(const Ansatz& super, const BoxSpec& box, const std::vector<double>& times,
                                       double dt = 1e-3);

/// sup |a - b| / min{1, exp(-v * min_i (x nu_i cot theta_i + y - chat t))} over the box nodes.
double weighted_gap(const FieldFn& a, const FieldFn& b, const DirectionFan& fan, const GridPtr& box, double t,
                    double v_star);

/// min_i (z . e_i / (e_i . e_0)) - chat t.
double facet_coordinate(const DirectionFan& fan, double t, std::span<const double> z);

/// Rate for the weights of the convergence estimates, from kappa, kappa2, beta and the fan.
double v_star_estimate(const FrontLibrary& lib, double beta, double C3);

}  // namespace pulsefront
