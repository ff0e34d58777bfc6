#include <doctest.h>

#include <fstream>
#include <string>

#include <json.hpp>

#include "pulsefront/config.hpp"
#include "pulsefront/error.hpp"
#include "support.hpp"

using namespace pulsefront;

namespace {

std::string config_error(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::config);
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("defaults describe the desk-scale planar setup") {
  const RunConfig c = default_config();
  CHECK(c.reaction.theta == 0.3);
  CHECK(c.reaction.sigma == 0.2);
  CHECK(c.reaction.mode == AmplitudeMode::even);
  CHECK(c.reaction.cell.lengths == std::vector<double>{1.0, 1.0});
  CHECK(c.fan.n() == 2);
  CHECK(c.curved.conv_tol == 1e-6);
  CHECK(c.stability.stab_tol == 1e-3);
  CHECK(c.hypotheses.z_points == 64);
  CHECK(c.hypotheses.u_points == 200);
  CHECK(c.digest.size() == 64u);
}

TEST_CASE("an empty object and the default text give the default digest") {
  const RunConfig d = default_config();
  CHECK(parse_config_text("{}").digest == d.digest);
  CHECK(parse_config_text(default_config_json()).digest == d.digest);
}

TEST_CASE("key order and whitespace do not change the digest") {
  const auto a = parse_config_text(R"({"reaction": {"theta": 0.35, "sigma": 0.25}, "output": {"dir": "x"}})");
  const auto b = parse_config_text(R"({ "output":{"dir":"x"},
      "reaction":{ "sigma":0.25,"theta":0.35 } })");
  CHECK(a.digest == b.digest);
  CHECK(a.canonical == b.canonical);
  CHECK(a.digest != default_config().digest);
}

TEST_CASE("the canonical text parses back to the same configuration") {
  const auto a = parse_config_text(R"({"speed_map": {"directions": 12}, "evolution": {"conv_tol": 2e-6}})");
  const auto b = parse_config_text(a.canonical);
  CHECK(b.digest == a.digest);
  CHECK(b.speed_map_directions == 12);
  CHECK(b.curved.conv_tol == 2e-6);
}

TEST_CASE("errors name the offending key") {
  CHECK(config_error(R"({"reaction": {"theta": 1.2}})").find("reaction.theta") != std::string::npos);
  CHECK(config_error(R"({"reaction": {"sigma": "big"}})").find("reaction.sigma") != std::string::npos);
  CHECK(config_error(R"({"reaction": {"colour": 1}})").find("reaction.colour") != std::string::npos);
  CHECK(config_error(R"({"nonsense": {}})").find("nonsense") != std::string::npos);
  CHECK(config_error(R"({"reaction": {"mode": "zigzag"}})").find("reaction.mode") != std::string::npos);
  CHECK(config_error(R"({"speed_map": {"directions": 3}})").find("speed_map.directions") != std::string::npos);
  CHECK_FALSE(config_error("{ not json").empty());
  CHECK_FALSE(config_error("[1, 2]").empty());
}

TEST_CASE("loading a missing file is a config error") {
  try {
    parse_config("/nonexistent/pulsefront.json");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK((e.code() == ErrorCode::config || e.code() == ErrorCode::io));
  }
}

TEST_CASE("loading from a file matches parsing the text") {
  const auto dir = testsupport::scratch_dir("config");
  const std::string text = R"({"reaction": {"theta": 0.28}})";
  std::ofstream((dir / "c.json").string()) << text;
  CHECK(parse_config((dir / "c.json").string()).digest == parse_config_text(text).digest);
}

TEST_CASE("the smoke variant is coarser and has its own digest") {
  const RunConfig d = default_config();
  const RunConfig s = smoke_config(d);
  CHECK(s.digest != d.digest);
  CHECK(s.speed_map_directions <= d.speed_map_directions);
  CHECK(s.reaction.theta == d.reaction.theta);
  CHECK(smoke_config(d).digest == s.digest);
}

TEST_CASE("every default key is listed in the default text") {
  const auto j = nlohmann::json::parse(default_config_json());
  for (const char* k : {"reaction", "geometry", "solver", "strip", "evolution", "scan", "stability", "output"})
    CHECK(j.contains(k));
}
