#pragma once

#include <string>
#include <vector>

namespace pulsefront {

/// Where a number in a report comes from.
enum class Provenance { paper_formula, trivial, derived_oracle, measured };

const char* to_string(Provenance p) noexcept;

enum class CheckStatus { pass, fail, skipped };

struct Check {
  std::string name;
  double measured = 0.0;
  double threshold = 0.0;
  std::string relation;  // how measured is compared with threshold, e.g. "<=" or ">"
  CheckStatus status = CheckStatus::fail;
  Provenance provenance = Provenance::measured;
  std::string where;  // module operation and grid that produced the number
};

/// Structured pass/fail record. Every numeric entry carries a provenance tag.
struct ExperimentReport {
  std::string id;
  std::string config_digest;
  std::vector<Check> checks;
  double wall_seconds = 0.0;

  /// Adds a check whose status is decided by `relation` applied to (measured, threshold).
  /// Supported relations: "<", "<=", ">", ">=", "==" (exact).
  Check& add(std::string name, double measured, std::string relation, double threshold,
             Provenance prov, std::string where = {});
  Check& add_flag(std::string name, bool ok, Provenance prov, std::string where = {});
  Check& add_skipped(std::string name, Provenance prov, std::string where = {});

  void merge(const ExperimentReport& other, const std::string& prefix = {});

  /// True when no check failed. Skipped checks do not count as failures.
  bool passed() const;
  std::size_t failures() const;
  const Check* find(const std::string& name) const;

  std::string to_csv() const;
  std::string summary() const;
};

bool evaluate_relation(double measured, const std::string& relation, double threshold);

}  // namespace pulsefront
