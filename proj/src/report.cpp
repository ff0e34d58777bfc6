#include "pulsefront/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "pulsefront/error.hpp"

namespace pulsefront {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ok: return "ok";
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::config: return "config";
    case ErrorCode::grid_mismatch: return "grid_mismatch";
    case ErrorCode::boundary_policy: return "boundary_policy";
    case ErrorCode::newton_divergence: return "newton_divergence";
    case ErrorCode::window_too_narrow: return "window_too_narrow";
    case ErrorCode::not_bracketed: return "not_bracketed";
    case ErrorCode::fit_window_empty: return "fit_window_empty";
    case ErrorCode::out_of_range: return "out_of_range";
    case ErrorCode::cfl_violation: return "cfl_violation";
    case ErrorCode::nan_detected: return "nan_detected";
    case ErrorCode::no_convergence: return "no_convergence";
    case ErrorCode::precondition: return "precondition";
    case ErrorCode::io: return "io";
    case ErrorCode::internal: return "internal";
  }
  return "unknown";
}

const char* to_string(Provenance p) noexcept {
  switch (p) {
    case Provenance::paper_formula: return "PAPER-formula";
    case Provenance::trivial: return "TRIVIAL";
    case Provenance::derived_oracle: return "DERIVED-oracle";
    case Provenance::measured: return "MEASURED";
  }
  return "MEASURED";
}

bool evaluate_relation(double measured, const std::string& relation, double threshold) {
  if (std::isnan(measured) || std::isnan(threshold)) return false;
  if (relation == "<") return measured < threshold;
  if (relation == "<=") return measured <= threshold;
  if (relation == ">") return measured > threshold;
  if (relation == ">=") return measured >= threshold;
  if (relation == "==") return measured == threshold;
  fail(ErrorCode::invalid_argument, "unknown relation '" + relation + "'");
}

Check& ExperimentReport::add(std::string name, double measured, std::string relation,
                             double threshold, Provenance prov, std::string where) {
  Check c;
  c.status = evaluate_relation(measured, relation, threshold) ? CheckStatus::pass : CheckStatus::fail;
  c.name = std::move(name);
  c.measured = measured;
  c.threshold = threshold;
  c.relation = std::move(relation);
  c.provenance = prov;
  c.where = std::move(where);
  checks.push_back(std::move(c));
  return checks.back();
}

Check& ExperimentReport::add_flag(std::string name, bool ok, Provenance prov, std::string where) {
  return add(std::move(name), ok ? 1.0 : 0.0, "==", 1.0, prov, std::move(where));
}

Check& ExperimentReport::add_skipped(std::string name, Provenance prov, std::string where) {
  Check c;
  c.name = std::move(name);
  c.measured = std::nan("");
  c.threshold = std::nan("");
  c.relation = "skip";
  c.status = CheckStatus::skipped;
  c.provenance = prov;
  c.where = std::move(where);
  checks.push_back(std::move(c));
  return checks.back();
}

void ExperimentReport::merge(const ExperimentReport& other, const std::string& prefix) {
  for (auto c : other.checks) {
    if (!prefix.empty()) c.name = prefix + "." + c.name;
    checks.push_back(std::move(c));
  }
  wall_seconds += other.wall_seconds;
}

bool ExperimentReport::passed() const { return failures() == 0; }

std::size_t ExperimentReport::failures() const {
  std::size_t n = 0;
  for (const auto& c : checks)
    if (c.status == CheckStatus::fail) ++n;
  return n;
}

const Check* ExperimentReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

namespace {
const char* status_name(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::fail: return "fail";
    case CheckStatus::skipped: return "skipped";
  }
  return "fail";
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}
}  // namespace

std::string ExperimentReport::to_csv() const {
  std::ostringstream os;
  os << "experiment,config_digest,check,measured,relation,threshold,status,provenance,where\n";
  char buf[64];
  for (const auto& c : checks) {
    os << csv_escape(id) << ',' << config_digest << ',' << csv_escape(c.name) << ',';
    std::snprintf(buf, sizeof buf, "%.10g", c.measured);
    os << buf << ',' << c.relation << ',';
    std::snprintf(buf, sizeof buf, "%.10g", c.threshold);
    os << buf << ',' << status_name(c.status) << ',' << to_string(c.provenance) << ','
       << csv_escape(c.where) << '\n';
  }
  return os.str();
}

std::string ExperimentReport::summary() const {
  std::ostringstream os;
  std::size_t skipped = 0;
  for (const auto& c : checks)
    if (c.status == CheckStatus::skipped) ++skipped;
  os << "experiment " << id << " [" << config_digest << "]: " << (passed() ? "PASS" : "FAIL") << " ("
     << checks.size() - failures() - skipped << " passed, " << failures() << " failed, " << skipped
     << " skipped, " << wall_seconds << " s)\n";
  char buf[256];
  for (const auto& c : checks) {
    std::snprintf(buf, sizeof buf, "  [%-7s] %-48s %14.6g %-4s %-14.6g %s\n", status_name(c.status),
                  c.name.c_str(), c.measured, c.relation.c_str(), c.threshold, to_string(c.provenance));
    os << buf;
  }
  return os.str();
}

}  // namespace pulsefront
