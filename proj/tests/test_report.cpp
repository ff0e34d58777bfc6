#include <doctest.h>

#include <cmath>

#include "pulsefront/report.hpp"

using namespace pulsefront;

TEST_CASE("relations decide the check status") {
  CHECK(evaluate_relation(1.0, "<", 2.0));
  CHECK_FALSE(evaluate_relation(2.0, "<", 2.0));
  CHECK(evaluate_relation(2.0, "<=", 2.0));
  CHECK(evaluate_relation(3.0, ">", 2.0));
  CHECK(evaluate_relation(2.0, ">=", 2.0));
  CHECK(evaluate_relation(0.0, "==", 0.0));
  CHECK_FALSE(evaluate_relation(1e-300, "==", 0.0));
  CHECK_FALSE(evaluate_relation(std::nan(""), "<", 1.0));
  CHECK_FALSE(evaluate_relation(std::nan(""), ">=", 1.0));
}

TEST_CASE("a report passes unless a check fails, and skipped checks do not count") {
  ExperimentReport r;
  r.id = "demo";
  r.add("small", 1e-9, "<", 1e-6, Provenance::measured);
  r.add_skipped("later", Provenance::trivial);
  CHECK(r.passed());
  CHECK(r.failures() == 0u);
  r.add_flag("broken", false, Provenance::derived_oracle);
  CHECK_FALSE(r.passed());
  CHECK(r.failures() == 1u);
  REQUIRE(r.find("later") != nullptr);
  CHECK(r.find("later")->status == CheckStatus::skipped);
  CHECK(r.find("missing") == nullptr);
}

TEST_CASE("merge prefixes check names with a single dot") {
  ExperimentReport a, b;
  b.add("x", 1.0, "==", 1.0, Provenance::trivial);
  a.merge(b, "inner");
  REQUIRE(a.find("inner.x") != nullptr);
  a.merge(b);
  CHECK(a.find("x") != nullptr);
}

TEST_CASE("CSV has one row per check with the provenance") {
  ExperimentReport r;
  r.id = "demo";
  r.config_digest = "abc";
  r.add("first", 0.5, "<", 1.0, Provenance::paper_formula, "somewhere, with a comma");
  r.add("second", 2.0, "<", 1.0, Provenance::measured);
  const std::string csv = r.to_csv();
  CHECK(csv.rfind("experiment,config_digest,check,measured,relation,threshold,status,provenance,where\n", 0) == 0);
  CHECK(csv.find("demo,abc,first,") != std::string::npos);
  CHECK(csv.find(to_string(Provenance::paper_formula)) != std::string::npos);
  CHECK(csv.find("\"somewhere, with a comma\"") != std::string::npos);
  CHECK(csv.find(",fail,") != std::string::npos);
  CHECK(r.summary().find("FAIL") != std::string::npos);
}
