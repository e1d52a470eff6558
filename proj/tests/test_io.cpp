#include "fixtures.hpp"
#include "thermodiag/error.hpp"
#include "thermodiag/io.hpp"
#include "thermodiag/weather.hpp"

#include <doctest.h>

#include <random>

using namespace thermodiag;

namespace {

const char* kMinimal = R"(
[zone]
capacity = 30000
ventilation_rate = 0.01
glazing_transmitted_fraction = 0

[component wall]
orientation = S
area = 10
layer = 0.1 1.75 2300 920
h_ci = 5
h_ce = 15
h_ri = 5
h_re = 5
absorptivity = 0.5
)";

int parse_error_line(const std::string& text) {
  try {
    io::parse_building_text(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return -1;
}

}  // namespace

TEST_CASE("parse_building: bundled test cell") {
  const auto d = fixtures::test_cell();
  CHECK(d.components.size() == 8);
  CHECK(build_mesh(d).node_count() == 23);
  const auto* door = d.find("door");
  REQUIRE(door);
  CHECK(door->layers.at(0).conductivity == 0.23);
  CHECK(d.find("roof")->absorptivity == 0.3);
  CHECK(d.find("floor")->outside_boundary == OutsideBoundary::NullFlux);
  CHECK(d.find("window")->window);
  CHECK(d.zone.ventilation_rate == 0.009);
}

TEST_CASE("parse_building: minimal description and defaults") {
  const auto d = io::parse_building_text(kMinimal);
  REQUIRE(d.components.size() == 1);
  CHECK(d.zone.air_specific_heat == 1006.0);
  CHECK(d.components[0].internal_node_count == 0);
  CHECK(d.components[0].orientation == Orientation::South);
  CHECK(d == fixtures::single_wall());
}

TEST_CASE("parse_building: errors carry line numbers") {
  std::string bad = kMinimal;
  bad.replace(bad.find("absorptivity = 0.5"), 18, "absorptivity = 1.2");
  CHECK(parse_error_line(bad) == 15);
  CHECK_THROWS_WITH_AS(io::parse_building_text(bad), doctest::Contains("absorptivity"), ParseError);

  CHECK_THROWS_AS(io::parse_building_text(""), ParseError);
  CHECK_THROWS_AS(io::parse_building_text("[zone]\ncapacity = 1\n"), ParseError);
  std::string unknown = kMinimal;
  unknown += "colour = red\n";
  CHECK(parse_error_line(unknown) == 16);
  std::string nan_area = kMinimal;
  nan_area.replace(nan_area.find("area = 10"), 9, "area = ten");
  CHECK(parse_error_line(nan_area) == 9);
  CHECK_THROWS_AS(io::parse_building("/nonexistent/x.bld"), ParseError);
}

TEST_CASE("write_building: round trip") {
  const auto d = fixtures::test_cell();
  CHECK(io::parse_building_text(io::write_building(d)) == d);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    auto x = fixtures::single_wall(trial % 4);
    x.components[0].area = 20 * u(rng);
    x.components[0].layers.push_back({u(rng) / 3, u(rng), 1000 * u(rng), 2000 * u(rng)});
    x.components[0].absorptivity = u(rng);
    x.components[0].h_ci = 10 * u(rng);
    x.zone.capacity = 1e5 * u(rng);
    x.glazing_transmitted_fraction = u(rng);
    CHECK(io::parse_building_text(io::write_building(x)) == x);
  }
}

TEST_CASE("parse_weather: bundled series") {
  const auto w = fixtures::weather();
  CHECK(w.size() == 480);
  CHECK(w.dt == 900.0);
  CHECK(w.start == io::parse_timestamp("2000-03-03T00:00:00"));
  const auto u = w.inputs(0);
  CHECK(u(kSky) < u(kAmbient));
}

TEST_CASE("parse_weather: validation") {
  const std::string head = "timestamp,T_ae,T_sky,I_N,I_S,I_E,I_W,I_H\n";
  const std::string r0 = "2000-01-01T00:00,20,10,0,0,0,0,0\n";
  const std::string r1 = "2000-01-01T00:15,21,11,0,0,0,0,0\n";
  const std::string r3 = "2000-01-01T00:45,21,11,0,0,0,0,0\n";
  CHECK(io::parse_weather_text(head + r0 + r1).size() == 2);
  CHECK_THROWS_WITH_AS(io::parse_weather_text(head + r0 + r1 + r3), doctest::Contains("non-uniform"), ParseError);
  CHECK_THROWS_AS(io::parse_weather_text(head + r1 + r0), ParseError);
  CHECK_THROWS_AS(io::parse_weather_text(head + r0), ParseError);
  CHECK_THROWS_AS(io::parse_weather_text("timestamp,T_ae,I_N,I_S,I_E,I_W,I_H\n" + r0 + r1), ParseError);
  CHECK_THROWS_AS(io::parse_weather_text(head + r0 + "2000-01-01T00:15,21,11,0,-5,0,0,0\n"), ParseError);
  CHECK_THROWS_AS(io::parse_weather_text(head + r0 + "2000-01-01T00:15,abc,11,0,0,0,0,0\n"), ParseError);
  // Column order is free.
  const auto w = io::parse_weather_text("timestamp,I_H,I_W,I_E,I_S,I_N,T_sky,T_ae\n2000-01-01T00:00,1,2,3,4,5,6,7\n"
                                        "2000-01-01T00:30,1,2,3,4,5,6,7\n");
  CHECK(w.dt == 1800.0);
  CHECK(w.records[0].ambient == 7.0);
  CHECK(w.records[0].horizontal == 1.0);
}

TEST_CASE("weather: write and parse round trip") {
  const auto w = synthetic_weather();
  const auto back = io::parse_weather_text(io::write_weather(w));
  REQUIRE(back.size() == w.size());
  CHECK(back.dt == w.dt);
  for (std::size_t n = 0; n < w.size(); ++n) CHECK(back.inputs(n) == w.inputs(n));
}

TEST_CASE("measurements: node columns") {
  const std::string text =
      "timestamp,node_17,node_23\n2000-01-01T00:00,20.5,21\n2000-01-01T00:15,20.6,21.1\n";
  const auto m = io::parse_measurements_text(text);
  CHECK(m.series.size() == 2);
  CHECK(m.at(17) == std::vector<double>{20.5, 20.6});
  CHECK(m.dt == 900.0);
  CHECK(io::parse_measurements_text(io::write_measurements(m)).series == m.series);
  CHECK_THROWS_AS(io::parse_measurements_text("timestamp,T_air\n2000-01-01T00:00,1\n2000-01-01T00:15,1\n"),
                  ParseError);
}

TEST_CASE("timestamps") {
  CHECK(io::parse_timestamp("1970-01-01T00:00:00") == 0);
  CHECK(io::parse_timestamp("2000-03-03T00:00:00Z") == 952041600);
  CHECK(io::parse_timestamp("2000-03-03 00:15") == 952041600 + 900);
  CHECK(io::format_timestamp(952041600) == "2000-03-03T00:00:00");
  CHECK_THROWS(io::parse_timestamp("yesterday"));
  CHECK_THROWS(io::parse_timestamp("2000-13-01T00:00"));
}

TEST_CASE("resample: linear interpolation") {
  const auto w = fixtures::weather();
  const auto half = resample(w, 450.0);
  CHECK(half.size() == 959);
  CHECK(half.records[2].ambient == w.records[1].ambient);
  CHECK(half.records[1].ambient == doctest::Approx(0.5 * (w.records[0].ambient + w.records[1].ambient)));
  CHECK(resample(w, 900.0).size() == 480);
}
