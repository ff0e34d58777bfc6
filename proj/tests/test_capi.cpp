#include <doctest.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

#include "pulsefront.h"
#include "support.hpp"

TEST_CASE("version and error names") {
  CHECK(std::strlen(pf_version()) > 0);
  CHECK(std::string(pf_error_name(PF_OK)) == "ok");
  CHECK(std::string(pf_error_name(PF_ERR_CONFIG)) == "config");
  CHECK(pf_set_threads(0) == PF_ERR_INVALID_ARGUMENT);
  CHECK(pf_set_threads(1) == PF_OK);
}

TEST_CASE("config errors return a code and a message naming the key") {
  pf_config* cfg = nullptr;
  CHECK(pf_config_parse(R"({"reaction": {"theta": 1.2}})", &cfg) == PF_ERR_CONFIG);
  CHECK(cfg == nullptr);
  CHECK(std::string(pf_last_error()).find("reaction.theta") != std::string::npos);
  CHECK(pf_config_parse(nullptr, &cfg) == PF_ERR_INVALID_ARGUMENT);
  CHECK(pf_config_load("/nonexistent/config.json", &cfg) != PF_OK);
}

TEST_CASE("default, parsed and smoke configurations") {
  pf_config *d = nullptr, *p = nullptr, *s = nullptr;
  REQUIRE(pf_config_default(&d) == PF_OK);
  REQUIRE(pf_config_parse(pf_config_default_text(), &p) == PF_OK);
  CHECK(std::string(pf_config_digest(d)) == pf_config_digest(p));
  CHECK(std::string(pf_config_canonical(d)) == pf_config_canonical(p));
  REQUIRE(pf_config_smoke(d, &s) == PF_OK);
  CHECK(std::string(pf_config_digest(s)) != pf_config_digest(d));
  CHECK(std::string(pf_config_output_dir(d)) == "runs");
  pf_config_free(d);
  pf_config_free(p);
  pf_config_free(s);
}

TEST_CASE("surface run through the C interface") {
  pf_config* cfg = nullptr;
  REQUIRE(pf_config_default(&cfg) == PF_OK);
  pf_report* rep = nullptr;
  pf_table* line = nullptr;
  REQUIRE(pf_run_surface(cfg, &rep, &line) == PF_OK);
  CHECK(pf_report_passed(rep) == 1);
  CHECK(pf_report_failures(rep) == 0u);
  CHECK(pf_report_checks(rep) > 0u);
  const char* name = nullptr;
  double measured = 0;
  int status = -1;
  REQUIRE(pf_report_check(rep, 0, &name, &measured, &status) == PF_OK);
  CHECK(std::strlen(name) > 0);
  CHECK(status == 0);
  CHECK(pf_report_check(rep, 100000, &name, &measured, &status) == PF_ERR_OUT_OF_RANGE);
  CHECK(std::string(pf_report_csv(rep)).find("implicit_residual_max") != std::string::npos);
  REQUIRE(pf_table_columns(line) == 4u);
  CHECK(std::string(pf_table_name(line, 1)) == "phi");
  const size_t n = pf_table_rows(line);
  CHECK(n > 10u);
  const double* phi = pf_table_column(line, 1);
  const double* psi = pf_table_column(line, 2);
  for (size_t i = 0; i < n; ++i) CHECK(phi[i] >= psi[i]);
  const auto dir = testsupport::scratch_dir("capi_table");
  CHECK(pf_table_write_csv(line, (dir / "line.csv").string().c_str()) == PF_OK);
  pf_table_free(line);
  pf_report_free(rep);
  pf_config_free(cfg);
}

TEST_CASE("front run, dump round trip and slices through the C interface") {
  pf_config *cfg = nullptr, *smoke = nullptr;
  REQUIRE(pf_config_default(&cfg) == PF_OK);
  REQUIRE(pf_config_smoke(cfg, &smoke) == PF_OK);
  pf_report* rep = nullptr;
  pf_field* prof = nullptr;
  double speed = 0;
  REQUIRE(pf_run_front(smoke, 90.0, &rep, &prof, &speed) == PF_OK);
  CHECK(pf_report_passed(rep) == 1);
  CHECK(speed == doctest::Approx(0.6127).epsilon(1e-3));
  CHECK(pf_field_dim(prof) == 3);
  const auto dir = testsupport::scratch_dir("capi_field");
  const std::string path = (dir / "p.pfld").string();
  REQUIRE(pf_field_write(prof, path.c_str(), R"({"speed": 0.61})") == PF_OK);
  CHECK(std::ifstream(path + ".json").good());
  pf_field* back = nullptr;
  REQUIRE(pf_field_read(path.c_str(), &back) == PF_OK);
  REQUIRE(pf_field_size(back) == pf_field_size(prof));
  CHECK(std::memcmp(pf_field_values(back), pf_field_values(prof), pf_field_size(prof) * sizeof(double)) == 0);
  const int other[2] = {0, 0};
  CHECK(pf_field_write_csv_slice(back, (dir / "s.csv").string().c_str(), 0, other, 2) == PF_OK);
  const int all[3] = {0, 1, 2};
  CHECK(pf_field_write_csv_slice(back, (dir / "s3.csv").string().c_str(), 0, all, 3) == PF_OK);
  const int bad[2] = {0, 99};
  CHECK(pf_field_write_csv_slice(back, (dir / "bad.csv").string().c_str(), 0, bad, 2) == PF_ERR_OUT_OF_RANGE);
  CHECK(pf_field_write_csv_all(back, (dir / "all.csv").string().c_str()) == PF_OK);
  pf_field_free(back);
  pf_field_free(prof);
  pf_report_free(rep);
  pf_config_free(smoke);
  pf_config_free(cfg);
}

TEST_CASE("errors from operations") {
  pf_field* f = nullptr;
  CHECK(pf_field_read("/nonexistent/x.pfld", &f) == PF_ERR_IO);
  pf_config* cfg = nullptr;
  REQUIRE(pf_config_default(&cfg) == PF_OK);
  pf_report** reps = nullptr;
  size_t n = 0;
  CHECK(pf_run_campaign(cfg, "2.99", &reps, &n) == PF_ERR_INVALID_ARGUMENT);
  CHECK(pf_run_evolve(cfg, "file", nullptr, nullptr, nullptr, nullptr) == PF_ERR_INVALID_ARGUMENT);
  pf_report* rep = nullptr;
  REQUIRE(pf_run_hypotheses(cfg, &rep) == PF_OK);
  CHECK(pf_report_passed(rep) == 1);
  pf_report_free(rep);
  REQUIRE(pf_run_comparison(cfg, 4, 50, 1, &rep) == PF_OK);
  CHECK(pf_report_passed(rep) == 1);
  pf_report_free(rep);
  pf_config_free(cfg);
  pf_config_free(nullptr);
  pf_report_free(nullptr);
}
