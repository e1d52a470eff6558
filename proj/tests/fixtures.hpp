#pragma once

#include "thermodiag/io.hpp"
#include "thermodiag/model.hpp"

#include <string>

namespace fixtures {

inline std::string data(const std::string& name) { return std::string(THERMODIAG_DATA_DIR) + "/" + name; }

inline thermodiag::BuildingDescription test_cell() { return thermodiag::io::parse_building(data("test_cell.bld")); }

inline thermodiag::WeatherSeries weather() { return thermodiag::io::parse_weather(data("weather_5day.csv")); }

inline thermodiag::Layer concrete(double thickness) { return {thickness, 1.75, 2300.0, 920.0}; }

// One opaque R2C wall and nothing else: outside, inside, mean-radiant, air.
inline thermodiag::BuildingDescription single_wall(int internal_nodes = 0) {
  thermodiag::BuildingDescription d;
  thermodiag::EnvelopeComponent c;
  c.name = "wall";
  c.orientation = thermodiag::Orientation::South;
  c.area = 10.0;
  c.layers = {concrete(0.1)};
  c.internal_node_count = internal_nodes;
  c.h_ci = 5.0;
  c.h_ce = 15.0;
  c.h_ri = 5.0;
  c.h_re = 5.0;
  c.absorptivity = 0.5;
  d.components.push_back(c);
  d.zone.capacity = 30000.0;
  d.zone.ventilation_rate = 0.01;
  return d;
}

}  // namespace fixtures
