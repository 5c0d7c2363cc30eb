#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "ptq/errors.hpp"
#include "ptq/run_config.hpp"

using namespace ptq;

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& text) {
  const auto dir = std::filesystem::temp_directory_path() / "ptq_test_run_config";
  std::filesystem::create_directories(dir);
  const auto path = dir / name;
  std::ofstream(path) << text;
  return path;
}

std::string error_message(auto&& fn) {
  try {
    fn();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("grid specs") {
  const auto g = parse_grid("0:1:0.1");
  REQUIRE(g.size() == 11);
  CHECK(g.front() == 0.0);
  CHECK(g.back() == 1.0);
  CHECK(g[3] == doctest::Approx(0.3));

  // A step that does not divide the range ends on a clamped final point.
  const auto clamped = parse_grid("0:1:0.3");
  REQUIRE(clamped.size() == 5);
  CHECK(clamped[3] == doctest::Approx(0.9));
  CHECK(clamped[4] == 1.0);

  const auto fine = parse_grid("0:12.57:0.01");
  CHECK(fine.size() == 1258);
  CHECK(fine.back() == 12.57);
  CHECK(parse_grid("0:8:0.04").size() == 201);

  const auto list = parse_grid(" 0, 0.13 ,0.2,0.4");
  REQUIRE(list.size() == 4);
  CHECK(list[1] == 0.13);
  CHECK(parse_grid("2.5") == std::vector<double>{2.5});

  CHECK_THROWS_AS(parse_grid(""), ConfigError);
  CHECK_THROWS_AS(parse_grid("0:1"), ConfigError);
  CHECK_THROWS_AS(parse_grid("0:1:0"), ConfigError);
  CHECK_THROWS_AS(parse_grid("0:1:-0.1"), ConfigError);
  CHECK_THROWS_AS(parse_grid("1:0:0.1"), ConfigError);
  CHECK_THROWS_AS(parse_grid("0:nan:0.1"), ConfigError);
  CHECK_THROWS_AS(parse_grid("0,x"), ConfigError);
  CHECK_THROWS_AS(parse_grid("0:1e12:1e-6"), ConfigError);
}

TEST_CASE("input state specs") {
  CHECK(parse_input_state("1,1", 2) == FockState{1, 1});
  CHECK(parse_input_state(" 1 , 0 ", 2) == FockState{1, 0});
  CHECK(parse_input_state("0,2", 2) == FockState{0, 2});

  const auto msg = error_message([] { parse_input_state("3,0", 2); });
  CHECK(msg.find("'3'") != std::string::npos);
  CHECK(msg.find("truncation") != std::string::npos);
  CHECK(error_message([] { parse_input_state("1,x", 2); }).find("'x'") != std::string::npos);
  CHECK_THROWS_AS(parse_input_state("2,1", 2), ConfigError);
  CHECK_THROWS_AS(parse_input_state("-1,0", 2), ConfigError);
  CHECK_THROWS_AS(parse_input_state("1", 2), ConfigError);
  CHECK_THROWS_AS(parse_input_state("1,1,1", 2), ConfigError);
}

TEST_CASE("setting keys") {
  RunConfig config;
  CHECK_FALSE(config.is_explicit("kappa"));
  config.set("kappa", "0.26");
  config.set("gamma", "0.2");
  config.set("format", "csv,json,svg");
  config.set("metadata.wavelength_nm", "815");
  CHECK(config.kappa == 0.26);
  CHECK(config.is_explicit("kappa"));
  CHECK_FALSE(config.is_explicit("z_grid"));
  CHECK(config.wants("svg"));
  CHECK(config.metadata.at("wavelength_nm") == "815");
  CHECK_NOTHROW(config.validate());

  CHECK_THROWS_AS(config.set("kapa", "1"), ConfigError);
  CHECK_THROWS_AS(config.set("kappa", "fast"), ConfigError);
  CHECK_THROWS_AS(config.set("workers", "0"), ConfigError);
  CHECK_THROWS_AS(config.set("truncation", "1.5"), ConfigError);
}

TEST_CASE("validation") {
  auto invalid = [](const char* key, const char* value) {
    RunConfig c;
    c.set(key, value);
    return error_message([&] { c.validate(); });
  };
  CHECK_FALSE(invalid("kappa", "0").empty());
  CHECK_FALSE(invalid("gamma", "-0.1").empty());
  CHECK_FALSE(invalid("mu", "1.5").empty());
  CHECK_FALSE(invalid("sigma_t", "0").empty());
  CHECK_FALSE(invalid("visibility_target", "0").empty());
  CHECK_FALSE(invalid("z_grid", "-1:1:0.1").empty());
  CHECK_FALSE(invalid("gammas", "0,-0.2").empty());
  CHECK_FALSE(invalid("format", "png").empty());
  CHECK(invalid("input", "3,0").find("'3'") != std::string::npos);
  CHECK(invalid("gamma", "0.35").empty());
}

TEST_CASE("canonical form and hash") {
  RunConfig a;
  RunConfig b;
  CHECK(a.hash() == b.hash());
  CHECK(a.hash().rfind("fnv1a64:", 0) == 0);
  CHECK(a.hash().size() == 8 + 16);

  b.set("out_dir", "/tmp/elsewhere");
  b.set("workers", "8");
  b.set("format", "json");
  CHECK(a.hash() == b.hash());

  b.set("gamma", "0.35");
  CHECK(a.hash() != b.hash());
  RunConfig c;
  c.set("metadata.sample", "A");
  CHECK(a.hash() != c.hash());
  CHECK(c.canonical().find("metadata.sample=A\n") != std::string::npos);
}

TEST_CASE("config files") {
  SUBCASE("flat key-value") {
    const auto path = write_temp("flat.conf",
                                 "# lossy coupler\n"
                                 "kappa = 0.25\n"
                                 "gamma = 0.35   # per cm\n"
                                 "\n"
                                 "z_grid = 0:8:0.02\n"
                                 "metadata.wavelength_nm = 815\n");
    RunConfig config;
    load_config_file(config, path);
    CHECK(config.kappa == 0.25);
    CHECK(config.gamma == 0.35);
    CHECK(config.z_grid == "0:8:0.02");
    CHECK(config.metadata.at("wavelength_nm") == "815");
    CHECK(config.is_explicit("gamma"));
    CHECK_FALSE(config.is_explicit("input"));
  }
  SUBCASE("JSON") {
    const auto path = write_temp("cfg.json",
                                 R"({"kappa": 0.26, "gamma": 0.2, "format": ["csv", "svg"],
                                     "gammas": [0, 0.13], "metadata": {"sample": "B", "runs": 3}})");
    RunConfig config;
    load_config_file(config, path);
    CHECK(config.kappa == 0.26);
    CHECK(config.wants("svg"));
    CHECK(parse_grid(config.gammas).size() == 2);
    CHECK(config.metadata.at("sample") == "B");
    CHECK(config.metadata.at("runs") == "3");
  }
  SUBCASE("flat and JSON forms hash identically") {
    RunConfig flat, json;
    load_config_file(flat, write_temp("same.conf", "kappa = 0.26\ngamma = 0.2\n"));
    load_config_file(json, write_temp("same.json", R"({"kappa": 0.26, "gamma": 0.2})"));
    CHECK(flat.hash() == json.hash());
  }
  SUBCASE("errors") {
    RunConfig config;
    CHECK_THROWS_AS(load_config_file(config, write_temp("bad.conf", "kappa 0.25\n")), ConfigError);
    CHECK_THROWS_AS(load_config_file(config, write_temp("bad.json", "{\"kappa\": ")), ConfigError);
    CHECK_THROWS_AS(load_config_file(config, write_temp("unknown.conf", "colour = blue\n")), ConfigError);
    CHECK_THROWS_AS(load_config_file(config, "/nonexistent/ptq.conf"), ConfigError);
  }
}
