#include "pulsefront/config.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "json.hpp"
#include "pulsefront/error.hpp"

namespace pulsefront {

using nlohmann::json;

namespace {

json defaults() {
  const RunConfig d;
  const ReactionParams& r = d.reaction;
  json j;
  j["reaction"] = {{"theta", r.theta},       {"sigma", r.sigma}, {"mode", "even"},
                   {"modulation", r.modulation}, {"level", r.level}, {"cell", r.cell.lengths}};
  j["hypotheses"] = {{"z_points", d.hypotheses.z_points}, {"u_points", d.hypotheses.u_points},
                     {"u_min", d.hypotheses.u_min},       {"u_max", d.hypotheses.u_max}};
  j["strip"] = {{"s_min", d.strip.s_min}, {"s_max", d.strip.s_max}, {"ds", d.strip.ds}, {"z_points", d.strip.z_points}};
  const PulsatingOptions& o = d.solver;
  j["solver"] = {{"newton_tol", o.newton_tol},       {"max_newton", o.max_newton}, {"max_restarts", o.max_restarts},
                 {"ptc_max_steps", o.ptc_max_steps}, {"ptc_dt0", o.ptc_dt0},       {"boundary_tol", o.boundary_tol},
                 {"max_widenings", o.max_widenings}, {"widen_step", o.widen_step}, {"s_order", o.s_order}};
  j["speed_map"] = {{"directions", d.speed_map_directions}, {"continuity_delta", d.continuity_delta}};
  j["geometry"] = {{"fan", json::array({{{"nu", {-1.0}}, {"theta_deg", 60.0}}, {{"nu", {1.0}}, {"theta_deg", 60.0}}})},
                   {"compat_tol", 1e-3}};
  j["library"] = {{"lattice_intervals", d.library.lattice_intervals},
                  {"epsilon_rho_factor", d.library.epsilon_rho_factor}};
  const ScanOptions& s = d.scan;
  j["scan"] = {{"betas", s.betas},       {"epsilon0", s.epsilon0},     {"epsilon_levels", s.epsilon_levels},
               {"alpha0", s.alpha0},     {"alpha_factor", s.alpha_factor}, {"alpha_floor", s.alpha_floor},
               {"branch", s.branch},     {"half_width", s.half_width}, {"below", s.below},
               {"above", s.above},       {"h", s.h},                   {"times", s.times}};
  const CurvedFrontOptions& c = d.curved;
  j["evolution"] = {{"half_width", c.window.half_width},
                    {"below", c.window.below},
                    {"above", c.window.above},
                    {"h", c.window.h},
                    {"conv_tol", c.conv_tol},
                    {"T_max", c.T_max},
                    {"core_margin", c.core_margin},
                    {"uniqueness_conv_tol", d.uniqueness_conv_tol},
                    {"bin_width", d.bin_width},
                    {"edge_margin", d.edge_margin},
                    {"far_tol", d.far_tol}};
  const StabilityCampaign& st = d.stability;
  j["stability"] = {{"stab_tol", st.stab_tol},     {"T_final", st.T_final},
                    {"amplitude", st.amplitude},   {"delta_fraction", st.delta_fraction},
                    {"varrho", st.varrho},         {"envelope_tol", st.envelope_tol}};
  j["output"] = {{"dir", d.output_dir}};
  return j;
}

const char* kind_name(const json& v) {
  if (v.is_object()) return "object";
  if (v.is_array()) return "array";
  if (v.is_string()) return "string";
  if (v.is_boolean()) return "boolean";
  if (v.is_number()) return "number";
  return "null";
}

void merge(json& base, const json& in, const std::string& path) {
  for (auto it = in.begin(); it != in.end(); ++it) {
    const std::string key = path.empty() ? it.key() : path + "." + it.key();
    if (!base.contains(it.key())) fail(ErrorCode::config, key + ": unknown key");
    json& slot = base[it.key()];
    const json& v = it.value();
    if (slot.is_object()) {
      if (!v.is_object()) fail(ErrorCode::config, key + ": expected an object, got " + kind_name(v));
      merge(slot, v, key);
      continue;
    }
    const bool same = (slot.is_number() && v.is_number()) || (slot.is_string() && v.is_string()) ||
                      (slot.is_array() && v.is_array()) || (slot.is_boolean() && v.is_boolean());
    if (!same) fail(ErrorCode::config, key + ": expected " + kind_name(slot) + ", got " + kind_name(v));
    if (slot.is_number_integer() && !v.is_number_integer())
      fail(ErrorCode::config, key + ": expected an integer");
    slot = v;
  }
}

// Typed access with the key path in every error.
class Reader {
 public:
  explicit Reader(const json& j) : j_(j) {}

  const json& node(const std::string& path) const {
    const json* p = &j_;
    std::size_t start = 0;
    while (start <= path.size()) {
      const std::size_t dot = path.find('.', start);
      const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
      p = &p->at(key);
      if (dot == std::string::npos) break;
      start = dot + 1;
    }
    return *p;
  }

  double num(const std::string& path) const { return node(path).get<double>(); }
  int integer(const std::string& path) const { return node(path).get<int>(); }
  std::string str(const std::string& path) const { return node(path).get<std::string>(); }

  std::vector<double> nums(const std::string& path) const {
    std::vector<double> out;
    for (const json& v : node(path)) {
      if (!v.is_number()) fail(ErrorCode::config, path + ": expected an array of numbers");
      out.push_back(v.get<double>());
    }
    return out;
  }

  std::vector<int> ints(const std::string& path) const {
    std::vector<int> out;
    for (const json& v : node(path)) {
      if (!v.is_number_integer()) fail(ErrorCode::config, path + ": expected an array of integers");
      out.push_back(v.get<int>());
    }
    return out;
  }

 private:
  const json& j_;
};

void check(bool ok, const std::string& path, const std::string& what) {
  if (!ok) fail(ErrorCode::config, path + ": " + what);
}

double positive(const Reader& r, const std::string& path) {
  const double v = r.num(path);
  check(v > 0.0 && std::isfinite(v), path, "must be positive");
  return v;
}

std::string sha256_hex(const std::string& text) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), md, &len, EVP_sha256(), nullptr) != 1)
    fail(ErrorCode::internal, "digest computation failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

RunConfig build(const json& j) {
  const Reader r(j);
  RunConfig c;

  ReactionParams& rp = c.reaction;
  rp.theta = r.num("reaction.theta");
  check(rp.theta > 0.0 && rp.theta < 1.0, "reaction.theta", "must lie in (0, 1)");
  rp.sigma = positive(r, "reaction.sigma");
  try {
    rp.mode = amplitude_mode_from_string(r.str("reaction.mode"));
  } catch (const Error&) {
    fail(ErrorCode::config, "reaction.mode: expected sine_product, even or homogeneous");
  }
  rp.modulation = r.num("reaction.modulation");
  check(rp.modulation >= 0.0 && rp.modulation < 1.0, "reaction.modulation", "must lie in [0, 1)");
  rp.level = positive(r, "reaction.level");
  rp.cell.lengths = r.nums("reaction.cell");
  check(rp.cell.lengths.size() >= 2 && rp.cell.lengths.size() <= 3, "reaction.cell", "needs 2 or 3 lengths");
  for (double L : rp.cell.lengths) check(L > 0.0, "reaction.cell", "lengths must be positive");
  const int N = static_cast<int>(rp.cell.lengths.size());

  c.hypotheses.z_points = r.integer("hypotheses.z_points");
  check(c.hypotheses.z_points >= 2, "hypotheses.z_points", "must be at least 2");
  c.hypotheses.u_points = r.integer("hypotheses.u_points");
  check(c.hypotheses.u_points >= 10, "hypotheses.u_points", "must be at least 10");
  c.hypotheses.u_min = r.num("hypotheses.u_min");
  c.hypotheses.u_max = r.num("hypotheses.u_max");
  check(c.hypotheses.u_min < 0.0 && c.hypotheses.u_max > 1.0, "hypotheses", "u range must contain [0, 1]");

  c.strip.s_min = r.num("strip.s_min");
  c.strip.s_max = r.num("strip.s_max");
  check(c.strip.s_min < 0.0, "strip.s_min", "must be negative");
  check(c.strip.s_max > 0.0, "strip.s_max", "must be positive");
  c.strip.ds = positive(r, "strip.ds");
  c.strip.z_points = r.ints("strip.z_points");
  check(static_cast<int>(c.strip.z_points.size()) == N, "strip.z_points", "needs one entry per cell dimension");
  for (int n : c.strip.z_points) check(n >= 1, "strip.z_points", "entries must be positive");

  PulsatingOptions& o = c.solver;
  o.newton_tol = positive(r, "solver.newton_tol");
  o.max_newton = r.integer("solver.max_newton");
  check(o.max_newton >= 1, "solver.max_newton", "must be at least 1");
  o.max_restarts = r.integer("solver.max_restarts");
  check(o.max_restarts >= 0, "solver.max_restarts", "must be nonnegative");
  o.ptc_max_steps = r.integer("solver.ptc_max_steps");
  check(o.ptc_max_steps >= 1, "solver.ptc_max_steps", "must be at least 1");
  o.ptc_dt0 = positive(r, "solver.ptc_dt0");
  o.boundary_tol = positive(r, "solver.boundary_tol");
  o.max_widenings = r.integer("solver.max_widenings");
  check(o.max_widenings >= 0, "solver.max_widenings", "must be nonnegative");
  o.widen_step = positive(r, "solver.widen_step");
  o.s_order = r.integer("solver.s_order");
  check(o.s_order == 2 || o.s_order == 4, "solver.s_order", "must be 2 or 4");

  c.speed_map_directions = r.integer("speed_map.directions");
  check(c.speed_map_directions >= 8, "speed_map.directions", "must be at least 8");
  c.continuity_delta = positive(r, "speed_map.continuity_delta");

  const json& fan = r.node("geometry.fan");
  check(fan.is_array() && !fan.empty(), "geometry.fan", "must be a nonempty array");
  for (std::size_t i = 0; i < fan.size(); ++i) {
    const std::string p = "geometry.fan[" + std::to_string(i) + "]";
    check(fan[i].is_object(), p, "expected an object with nu and theta_deg");
    for (auto it = fan[i].begin(); it != fan[i].end(); ++it)
      check(it.key() == "nu" || it.key() == "theta_deg", p + "." + it.key(), "unknown key");
    check(fan[i].contains("nu") && fan[i]["nu"].is_array(), p + ".nu", "missing or not an array");
    check(fan[i].contains("theta_deg") && fan[i]["theta_deg"].is_number(), p + ".theta_deg", "missing or not a number");
    std::vector<double> nu;
    for (const json& v : fan[i]["nu"]) {
      check(v.is_number(), p + ".nu", "expected numbers");
      nu.push_back(v.get<double>());
    }
    check(static_cast<int>(nu.size()) == N - 1, p + ".nu", "needs N - 1 components");
    double norm = 0.0;
    for (double v : nu) norm += v * v;
    check(std::abs(std::sqrt(norm) - 1.0) < 1e-9, p + ".nu", "must be a unit vector");
    const double th = fan[i]["theta_deg"].get<double>();
    check(th > 0.0 && th <= 90.0, p + ".theta_deg", "must lie in (0, 90]");
    c.fan.nu.push_back(nu);
    c.fan.theta.push_back(th * std::numbers::pi / 180.0);
  }
  c.fan.compat_tol = positive(r, "geometry.compat_tol");

  c.library.lattice_intervals = r.integer("library.lattice_intervals");
  check(c.library.lattice_intervals >= 1, "library.lattice_intervals", "must be at least 1");
  c.library.epsilon_rho_factor = positive(r, "library.epsilon_rho_factor");
  c.library.strip = c.strip;
  c.library.solver = c.solver;

  ScanOptions& s = c.scan;
  s.betas = r.nums("scan.betas");
  check(!s.betas.empty(), "scan.betas", "must be nonempty");
  for (double b : s.betas) check(b > 0.0 && b <= 1.0, "scan.betas", "entries must lie in (0, 1]");
  s.epsilon0 = positive(r, "scan.epsilon0");
  s.epsilon_levels = r.integer("scan.epsilon_levels");
  check(s.epsilon_levels >= 1, "scan.epsilon_levels", "must be at least 1");
  s.alpha0 = positive(r, "scan.alpha0");
  s.alpha_factor = r.num("scan.alpha_factor");
  check(s.alpha_factor > 0.0 && s.alpha_factor < 1.0, "scan.alpha_factor", "must lie in (0, 1)");
  s.alpha_floor = positive(r, "scan.alpha_floor");
  s.branch = r.integer("scan.branch");
  check(s.branch >= 0 && s.branch < static_cast<int>(c.fan.theta.size()), "scan.branch", "must index a fan direction");
  s.half_width = positive(r, "scan.half_width");
  s.below = positive(r, "scan.below");
  s.above = positive(r, "scan.above");
  s.h = positive(r, "scan.h");
  s.times = r.nums("scan.times");
  check(!s.times.empty(), "scan.times", "must be nonempty");

  CurvedFrontOptions& cf = c.curved;
  cf.window.half_width = positive(r, "evolution.half_width");
  cf.window.below = positive(r, "evolution.below");
  cf.window.above = positive(r, "evolution.above");
  cf.window.h = positive(r, "evolution.h");
  const double cell_y = rp.cell.lengths.back() / cf.window.h;
  check(std::abs(cell_y - std::round(cell_y)) < 1e-9, "evolution.h", "must divide the cell height");
  cf.conv_tol = positive(r, "evolution.conv_tol");
  cf.T_max = positive(r, "evolution.T_max");
  cf.core_margin = r.num("evolution.core_margin");
  check(cf.core_margin >= 0.0, "evolution.core_margin", "must be nonnegative");
  c.uniqueness_conv_tol = positive(r, "evolution.uniqueness_conv_tol");
  c.bin_width = positive(r, "evolution.bin_width");
  c.edge_margin = r.num("evolution.edge_margin");
  check(c.edge_margin >= 0.0, "evolution.edge_margin", "must be nonnegative");
  c.far_tol = positive(r, "evolution.far_tol");

  StabilityCampaign& st = c.stability;
  st.stab_tol = positive(r, "stability.stab_tol");
  st.T_final = positive(r, "stability.T_final");
  st.amplitude = r.num("stability.amplitude");
  check(st.amplitude > 0.0 && st.amplitude <= 1.0, "stability.amplitude", "must lie in (0, 1]");
  st.delta_fraction = r.num("stability.delta_fraction");
  check(st.delta_fraction > 0.0 && st.delta_fraction <= 0.25, "stability.delta_fraction", "must lie in (0, 1/4]");
  st.varrho = r.nums("stability.varrho");
  check(!st.varrho.empty(), "stability.varrho", "must be nonempty");
  for (double v : st.varrho) check(v > 0.0, "stability.varrho", "entries must be positive");
  st.envelope_tol = r.num("stability.envelope_tol");
  check(st.envelope_tol >= 0.0, "stability.envelope_tol", "must be nonnegative");

  c.output_dir = r.str("output.dir");
  check(!c.output_dir.empty(), "output.dir", "must be nonempty");

  c.canonical = j.dump();
  c.digest = sha256_hex(c.canonical);
  return c;
}

}  // namespace

std::string default_config_json() { return defaults().dump(2); }

RunConfig parse_config_text(const std::string& text) {
  json in;
  try {
    in = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::config, std::string("config is not valid JSON: ") + e.what());
  }
  if (!in.is_object()) fail(ErrorCode::config, "config must be a JSON object");
  json j = defaults();
  merge(j, in, "");
  try {
    return build(j);
  } catch (const json::exception& e) {
    fail(ErrorCode::config, std::string("config type error: ") + e.what());
  }
}

RunConfig parse_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorCode::config, "cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str());
}

RunConfig default_config() { return parse_config_text("{}"); }

RunConfig smoke_config(const RunConfig& cfg) {
  json j = json::parse(cfg.canonical);
  j["hypotheses"]["z_points"] = 32;
  j["hypotheses"]["u_points"] = 100;
  j["strip"]["ds"] = 0.25;
  std::vector<int> zp(cfg.reaction.cell.lengths.size(), 6);
  j["strip"]["z_points"] = zp;
  j["library"]["lattice_intervals"] = 4;
  j["speed_map"]["directions"] = 8;
  j["scan"]["h"] = 0.25;
  j["scan"]["betas"] = std::vector<double>{1.0};
  j["evolution"]["h"] = 0.25;
  j["evolution"]["below"] = 10.0;
  j["evolution"]["above"] = 30.0;
  j["evolution"]["T_max"] = 200.0;
  j["stability"]["T_final"] = 40.0;
  return build(j);
}

}  // namespace pulsefront
