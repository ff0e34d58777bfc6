#pragma once

#include <string>
#include <vector>

#include "pulsefront/evolution.hpp"
#include "pulsefront/fronts.hpp"
#include "pulsefront/geometry.hpp"
#include "pulsefront/pulsating.hpp"
#include "pulsefront/reaction.hpp"

namespace pulsefront {

struct StabilityCampaign {
  double stab_tol = 1e-3;
  double T_final = 60.0;
  double amplitude = 0.1;       // peak of the added perturbations
  double delta_fraction = 0.25;  // delta = fraction * gamma_star
  std::vector<double> varrho{1.0, 4.0, 16.0, 64.0, 256.0, 1024.0};
  double envelope_tol = 1e-9;
};

/// Everything a run needs, with defaults filled.
struct RunConfig {
  ReactionParams reaction;
  HypothesisSample hypotheses;
  StripSpec strip;
  PulsatingOptions solver;
  int speed_map_directions = 16;  // the jump check compares this grid with its halving
  double continuity_delta = 0.1;  // first angle step of the e-continuity check
  DirectionFan fan;
  FrontLibraryOptions library;  // strip and solver copied from above
  ScanOptions scan;
  CurvedFrontOptions curved;
  double uniqueness_conv_tol = 1e-7;
  double bin_width = 1.0;
  double edge_margin = 2.0;
  double far_tol = 1e-5;
  StabilityCampaign stability;
  std::string output_dir = "runs";

  std::string canonical;  // effective configuration as canonical JSON
  std::string digest;     // SHA-256 of `canonical`
};

/// The default configuration as JSON text; every accepted key appears in it.
std::string default_config_json();

/// Parses JSON text over the defaults. Unknown keys and type or range violations throw
/// Error(config) with the key path in the message.
RunConfig parse_config_text(const std::string& text);
RunConfig parse_config(const std::string& path);
RunConfig default_config();

/// Coarse variant for quick runs: coarser grids, fewer directions, shorter horizons.
RunConfig smoke_config(const RunConfig& cfg);

}  // namespace pulsefront
