#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "pulsefront/fronts.hpp"
#include "pulsefront/grid.hpp"
#include "pulsefront/reaction.hpp"
#include "pulsefront/report.hpp"

namespace pulsefront {

enum class Frame { lab, comoving };
enum class BoundarySource { sub, super, frozen_initial };

const char* to_string(Frame f) noexcept;
const char* to_string(BoundarySource b) noexcept;
Frame frame_from_string(const std::string& s);
BoundarySource boundary_source_from_string(const std::string& s);

/// Largest monotone explicit Euler step: 0.9 / (2N / h_min^2 + advection / h_y + sup|f_u|).
double cfl_dt(const Nonlinearity& nl, const Grid& box, double advection = 0.0);

struct CauchyConfig {
  GridPtr box;  // lab coordinates at t = 0, last axis is y
  double dt = 0.0;  // 0 picks cfl_dt
  double T_final = 1.0;
  Frame frame = Frame::lab;
  double chat = 0.0;  // speed of the comoving frame along y
  BoundarySource boundary_source = BoundarySource::sub;
  double snapshot_every = 0.0;  // 0 keeps the first and last states only
  double clamp_gamma = -1.0;    // values are clamped to [0, 1 + gamma]; negative uses gamma_star
};

struct StepStats {
  std::size_t clamped_interior = 0;
  std::size_t clamped_boundary = 0;
};

/// Explicit Euler u + dt (Lap u + f) at interior nodes, plus chat d_y u by forward differences in the
/// comoving frame. Boundary nodes take `boundary` at t + dt in lab coordinates, or keep their values
/// for frozen_initial.
Field step(const Field& u, double t, const CauchyConfig& cfg, const Nonlinearity& nl, const FieldFn& boundary,
           StepStats* stats = nullptr);

struct Trajectory {
  std::vector<Field> snapshots;
  std::vector<double> deltas;  // sup-norm change between consecutive snapshots on shared nodes
  std::string initial_id;
  std::string boundary_id;
  double dt = 0.0;
  double cfl = 0.0;
  long steps = 0;
  StepStats clamps;
};

/// Called after every step; returning false stops the run.
using StepObserver = std::function<bool(const Field& u, long step)>;

Trajectory solve_cauchy(const Field& u0, const CauchyConfig& cfg, const Nonlinearity& nl, const FieldFn& boundary,
                        const std::string& initial_id = "u0", const StepObserver& observer = {});

/// Lab-frame box [-half_width, half_width]^(N-1) x [-below, above] that moves up by one period
/// cell L_N every P = L_N / chat.
struct WindowSpec {
  double half_width = 4.0;
  double below = 12.0;
  double above = 30.0;
  double h = 0.125;
};

class TrackedWindow {
 public:
  TrackedWindow(const Nonlinearity& nl, double chat, const WindowSpec& spec);

  const WindowSpec& spec() const { return spec_; }
  GridPtr base() const { return base_; }
  /// The window in lab coordinates at a step.
  GridPtr grid(long step) const;
  double dt() const { return dt_; }
  double cfl() const { return cfl_; }
  int steps_per_period() const { return m_; }
  double period() const { return period_; }
  double cell() const { return cell_; }
  double chat() const { return chat_; }
  int shift_rows() const { return rows_; }
  long offset(long step) const;  // window shifts done before `step`
  double time(long step) const { return static_cast<double>(step) * dt_; }

 private:
  WindowSpec spec_;
  GridPtr base_;
  double chat_ = 0.0, cell_ = 1.0, period_ = 0.0, dt_ = 0.0, cfl_ = 0.0;
  int m_ = 0, rows_ = 0;
};

/// Time stepping on a tracked window with boundary data that repeats after each period in window
/// coordinates, as V-sub and V-bar do. Boundary values are cached per phase.
struct StencilData;

class TrackedRun {
 public:
  TrackedRun(std::shared_ptr<const TrackedWindow> window, const Nonlinearity& nl, const FieldFn& boundary,
             double clamp_gamma = -1.0);

  const TrackedWindow& window() const { return *window_; }
  std::shared_ptr<const TrackedWindow> window_ptr() const { return window_; }
  /// Samples f at t = 0 and imposes the boundary data.
  std::vector<double> initial(const FieldFn& f) const;
  /// Imposes the boundary data of step k on window values.
  void impose(std::vector<double>& u, long k) const;
  /// Advances window values from step k to k + 1, shifting the window when a period ends.
  void advance(std::vector<double>& u, long k, std::vector<double>& scratch, StepStats& stats) const;
  Field field(const std::vector<double>& u, long k) const;

 private:
  std::shared_ptr<const TrackedWindow> window_;
  const Nonlinearity* nl_;
  std::vector<double> amp_;
  std::shared_ptr<const StencilData> stencil_;
  std::vector<std::size_t> boundary_nodes_;
  std::vector<std::vector<double>> phase_values_;  // per phase, per boundary node
  std::vector<double> fill_;                       // top rows entering at a shift
  std::vector<std::uint8_t> is_boundary_;
  double upper_ = 1.0;
};

/// The converged curved front: one period of window states. Extended to all times by
/// V(t + k P, x, y + k L_N) = V(t, x, y).
struct PeriodicFront {
  std::shared_ptr<const TrackedWindow> window;
  std::vector<std::vector<double>> phases;  // phase p holds step p modulo the period

  /// Window state of an arbitrary step in lab coordinates.
  Field at_step(long k) const;
  /// Linear in time between steps, multilinear in space; z must lie inside the window at t.
  double value(double t, std::span<const double> z) const;
  FieldFn as_field_fn() const;
};

struct CurvedFrontOptions {
  WindowSpec window;
  double conv_tol = 1e-6;
  double T_max = 400.0;
  BoundarySource boundary = BoundarySource::sub;
  int snapshot_periods = 1;
  bool check_sandwich = true;
  double clamp_gamma = -1.0;
  double core_margin = 2.0;  // the time-increment check skips nodes this close to the window edge
};

struct CurvedFront {
  PeriodicFront vhat;
  Trajectory trajectory;  // phase-zero states at the snapshot cadence
  std::vector<double> period_deltas;  // sup |u(t + P, shifted) - u(t)| at each period end
  bool converged = false;
  double final_delta = 0.0;
  double identity_residual = 0.0;  // the same identity re-checked over the stored period
  double sandwich_low = 0.0;       // min over snapshots of u - V-sub
  double sandwich_high = 0.0;      // max over snapshots of u - V-bar
  double min_time_increment = 0.0;  // min of V(k+1) - V(k) over core nodes with 1e-9 < V < 1 - 1e-9
  long steps = 0;
  StepStats clamps;
  std::string boundary_id;
};

/// Evolves `init` (V-sub at t = 0 when empty) on the tracked window until the period map moves the
/// state by less than conv_tol. `super` supplies V-bar for the sandwich check and the super
/// boundary source; it may be null when neither is needed.
CurvedFront build_curved_front(std::shared_ptr<const FrontLibrary> lib, const Nonlinearity& nl,
                               const AnsatzParams* super, const CurvedFrontOptions& opts,
                               const FieldFn& init = {}, const std::string& init_id = "sub");

/// |a - b| at phase zero; nodes where it is below `tol` are trusted.
std::vector<double> bracket_gap(const PeriodicFront& a, const PeriodicFront& b);

struct GapBins {
  std::vector<double> lo, hi, max_gap;
  std::vector<std::size_t> count;
};

struct ConvergenceReport {
  GapBins bins;
  ExperimentReport report;
  double v_star = 0.0;
};

/// Weighted gap |V - V-sub| / min{1, exp(-v_star * facet coordinate)} tabulated against the
/// distance to the moving ridge (N = 2: the vertex (0, chat t)). Nodes with a false `trust` entry
/// and nodes closer than `edge_margin` to the window edge are left out. Bin maxima must not
/// increase beyond the bin holding the largest one.
ConvergenceReport measure_gap_decay(const Field& v, double t, const FrontLibrary& lib, double v_star,
                                           const std::vector<std::uint8_t>* trust = nullptr, double bin_width = 1.0,
                                           double far_tol = 1e-5, double edge_margin = 0.0);

struct StabilityOptions {
  double stab_tol = 1e-3;
  double T_final = 60.0;
  int record_periods = 1;
  double v = 0.0;             // rate in the decay condition on u0
  double decay_tol = 1e-10;   // bound on that weighted quotient in the outer distance band
  double outer_band = 2.0;    // width of the band next to the window boundary
  bool check_envelope = false;
  AnsatzParams envelope;      // W_delta^+ parameters, T included
  double envelope_tol = 0.0;
};

struct StabilityResult {
  bool accepted = false;  // preconditions on u0 held
  std::vector<double> times, errors, envelope_excess;
  double decay_quotient = 0.0;
  double min_initial_gap = 0.0;  // min of u0 - V-sub(0)
  long eventually_decreasing_from = -1;
  ExperimentReport report;
};

/// Evolves u0 (values on the window at step 0) with V-sub boundary data and records the sup
/// distance to the aligned V_hat once per record interval.
StabilityResult run_stability(const PeriodicFront& vhat, std::shared_ptr<const FrontLibrary> lib,
                              const Nonlinearity& nl, const std::vector<double>& u0, const StabilityOptions& opts,
                              const std::string& id = "u0");

}  // namespace pulsefront
