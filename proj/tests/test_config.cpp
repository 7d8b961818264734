#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "wide/config.hpp"

using wide::Config;

TEST_CASE("config grammar") {
  const Config c = Config::parse(R"(
# comment
; another
[grid]
points = 64
length=6.5   
[sweep]
eps = 0.25, 0.1 ,0.05
flag = yes
)");
  CHECK(c.has_section("grid"));
  CHECK_FALSE(c.has_section("data"));
  CHECK(c.get_int("grid", "points", 0) == 64);
  CHECK(c.get_double("grid", "length", 0.0) == 6.5);
  CHECK(c.get_double("grid", "missing", 3.0) == 3.0);
  CHECK(c.get_list("sweep", "eps", {}) == std::vector<double>{0.25, 0.1, 0.05});
  CHECK(c.get_bool("sweep", "flag", false));
  CHECK(c.get_string("sweep", "absent", "x") == "x");
  CHECK_FALSE(c.get("grid", "dim").has_value());
}

TEST_CASE("config errors name the line") {
  auto message = [](const std::string& text) {
    try {
      Config::parse(text, "t.cfg");
    } catch (const std::invalid_argument& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message("key = 1\n").find("t.cfg:1") != std::string::npos);
  CHECK(message("[a]\nx = 1\nx = 2\n").find("t.cfg:3") != std::string::npos);
  CHECK(message("[a]\n[a]\n").find("t.cfg:2") != std::string::npos);
  CHECK(message("[a]\njust text\n").find("t.cfg:2") != std::string::npos);
  CHECK(message("[a b]\n").find("t.cfg:1") != std::string::npos);
  CHECK(message("[a]\n bad key = 1\n").find("t.cfg:2") != std::string::npos);

  const Config c = Config::parse("[a]\nn = 1.5\nb = maybe\nl = 1, x\n");
  CHECK_THROWS_AS(c.get_int("a", "n", 0), std::invalid_argument);
  CHECK_THROWS_AS(c.get_bool("a", "b", false), std::invalid_argument);
  CHECK_THROWS_AS(c.get_list("a", "l", {}), std::invalid_argument);
  CHECK_THROWS_AS(c.get_double("a", "b", 0.0), std::invalid_argument);
}

TEST_CASE("unknown sections and keys are rejected") {
  const Config c = Config::parse("[grid]\npoints = 8\n[extra]\nz = 1\n");
  CHECK_THROWS_AS(c.require_known({{"grid", {"points"}}}), std::invalid_argument);
  const Config d = Config::parse("[grid]\npoints = 8\npoint = 9\n");
  try {
    d.require_known({{"grid", {"points"}}});
    FAIL("expected rejection");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("point") != std::string::npos);
  }
  CHECK_NOTHROW(Config::parse("[grid]\npoints = 8\n").require_known({{"grid", {"points", "dim"}}}));
}

TEST_CASE("serialize round trip and load") {
  Config c;
  c.set("b", "y", "2");
  c.set("a", "x", "one two");
  const Config back = Config::parse(c.serialize());
  CHECK(back.get_string("a", "x", "") == "one two");
  CHECK(back.get_int("b", "y", 0) == 2);
  CHECK(back.serialize() == c.serialize());

  const auto path = std::filesystem::temp_directory_path() / "wide_config_test.cfg";
  {
    std::ofstream out(path);
    out << c.serialize();
  }
  CHECK(Config::load(path.string()).get_int("b", "y", 0) == 2);
  std::filesystem::remove(path);
  CHECK_THROWS(Config::load((std::filesystem::temp_directory_path() / "wide_no_such_file.cfg").string()));
}
