#include <cmath>

#include "doctest.h"
#include "polylayer/errors.hpp"
#include "run_config.hpp"

using namespace polylayer;
using namespace polylayer::cli;
using doctest::Approx;

TEST_SUITE("config") {

TEST_CASE("angles need a unit") {
  CHECK(parse_angle("90deg") == Approx(kPi / 2).epsilon(1e-15));
  CHECK(parse_angle(" 1.25 rad") == 1.25);
  CHECK(parse_angle("-0.5rad") == -0.5);
  CHECK_THROWS_AS(parse_angle("90"), InvalidInput);
  CHECK_THROWS_AS(parse_angle("deg"), InvalidInput);
  CHECK_THROWS_AS(parse_angle("ninety deg"), InvalidInput);
  CHECK_THROWS_AS(parse_angle("1.5radians"), InvalidInput);
  CHECK_THROWS_AS(parse_angle("nanrad"), InvalidInput);
  for (double a : {kPi / 3, 0.26, 2.4, 1e-3, std::nextafter(kPi / 2, 0.0)}) CHECK(parse_angle(format_angle(a)) == a);
}

TEST_CASE("config round trip is exact") {
  RunConfig c;
  c.subcommand = "certify";
  c.geometry.kind = "trihedral";
  c.geometry.angles = {kPi / 2, 0.26, kPi / 2};
  c.thetas = {0.3, 1.7};
  c.eps = {1e-3, 0.5};
  c.alpha = 0.2;
  c.formats = {"json", "csv"};
  c.seed = 123456789012345ULL;
  c.tolerance = 3e-10;
  RunConfig back = from_json(nlohmann::json::parse(to_json(c).dump()));
  CHECK(back == c);
  CHECK(to_json(back).dump() == to_json(c).dump());
}

TEST_CASE("partial documents keep base values") {
  RunConfig base;
  base.h = 0.05;
  auto c = from_json(nlohmann::json::parse(R"({"levels": 4, "geometry": {"kind": "regular", "n": 4, "angles": ["60deg"]}})"), base);
  CHECK(c.h == 0.05);
  CHECK(c.levels == 4);
  CHECK(c.geometry.n == 4);
  CHECK(c.geometry.angles[0] == Approx(kPi / 3));
}

TEST_CASE("malformed documents are rejected") {
  using nlohmann::json;
  CHECK_THROWS_AS(from_json(json::parse(R"({"hh": 0.1})")), InvalidInput);
  CHECK_THROWS_AS(from_json(json::parse(R"({"geometry": {"kind": "fichera", "extra": 1}})")), InvalidInput);
  CHECK_THROWS_AS(from_json(json::parse(R"({"h": "small"})")), InvalidInput);
  CHECK_THROWS_AS(from_json(json::parse(R"({"theta": 1.2})")), InvalidInput);
  CHECK_THROWS_AS(from_json(json::parse(R"([1, 2])")), InvalidInput);
}

TEST_CASE("validation covers every section") {
  RunConfig c;
  c.subcommand = "waveguide";
  CHECK_NOTHROW(c.validate());
  auto bad = [&](auto mutate) {
    RunConfig d = c;
    mutate(d);
    CHECK_THROWS_AS(d.validate(), InvalidInput);
  };
  bad([](RunConfig& d) { d.subcommand = "frobnicate"; });
  bad([](RunConfig& d) { d.formats = {"xml"}; });
  bad([](RunConfig& d) { d.formats.clear(); });
  bad([](RunConfig& d) { d.h = 0; });
  bad([](RunConfig& d) { d.voxel_h = 0.5; });
  bad([](RunConfig& d) { d.theta = 4; });
  bad([](RunConfig& d) { d.thetas = {1, 0.5}; });
  bad([](RunConfig& d) { d.R_list = {3, 2}; });
  bad([](RunConfig& d) { d.eps = {-1}; });
  bad([](RunConfig& d) { d.hardy_case = "sin"; });
  bad([](RunConfig& d) { d.weyl_n_max = 1; });
  bad([](RunConfig& d) { d.geometry.kind = "sphere"; });
  bad([](RunConfig& d) {
    d.geometry.kind = "regular";
    d.geometry.n = 4;
    d.geometry.angles = {kPi / 2};
  });
  bad([](RunConfig& d) {
    d.geometry.kind = "trihedral";
    d.geometry.angles = {0.1, 0.2, 1.0};
  });
}

TEST_CASE("geometry kinds build the expected layers") {
  RunConfig c;
  CHECK(c.layer().beta_min() == Approx(kPi / 2));
  c.geometry = {"regular", 4, {kPi / 3}};
  CHECK(c.layer().angle().faces() == 4);
  c.geometry = {"trihedral", 3, {kPi / 2, 0.4, kPi / 2}};
  CHECK(c.layer().beta_min() == Approx(0.4));
  CHECK(subcommands().size() == 12);
}

}  // TEST_SUITE
