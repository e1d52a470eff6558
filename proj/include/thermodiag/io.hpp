#pragma once

// Text formats: building description (.bld), weather and measurement CSV,
// verification case files. Grammar is documented in docs/formats.md.

#include "thermodiag/model.hpp"
#include "thermodiag/simulate.hpp"

#include <cstdint>
#include <string>

namespace thermodiag::io {

BuildingDescription parse_building_text(const std::string& text, const std::string& source = "<building>");
BuildingDescription parse_building(const std::string& path);
/// Inverse of parse_building_text; doubles are written in shortest round-trip form.
std::string write_building(const BuildingDescription& desc);

WeatherSeries parse_weather_text(const std::string& text, const std::string& source = "<weather>");
WeatherSeries parse_weather(const std::string& path);
std::string write_weather(const WeatherSeries& weather);

MeasurementSeries parse_measurements_text(const std::string& text, const std::string& source = "<measurements>");
MeasurementSeries parse_measurements(const std::string& path);
std::string write_measurements(const MeasurementSeries& meas);

/// Seconds since 1970-01-01T00:00:00Z for "YYYY-MM-DDTHH:MM[:SS][Z]"
/// (a space may replace the T).
std::int64_t parse_timestamp(const std::string& text);
std::string format_timestamp(std::int64_t seconds);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

}  // namespace thermodiag::io
