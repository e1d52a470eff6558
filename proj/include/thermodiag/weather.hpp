#pragma once

#include "thermodiag/simulate.hpp"

#include <cstdint>

namespace thermodiag {

struct SyntheticWeatherOptions {
  int days = 5;
  double dt = 900.0;
  std::int64_t start = 952041600;  // 2000-03-03T00:00:00Z
  double latitude_deg = -20.9;
  int day_of_year = 63;
  double mean_temperature = 25.0;    // degC
  double daily_amplitude = 4.0;      // degC, half peak-to-peak
  double daily_drift = 0.4;          // degC per day
  double sky_depression = 12.0;      // T_ae - T_sky, degC
  double clearness = 0.7;            // atmospheric transmittance per air mass
};

/// Sinusoidal ambient temperature (peak at 15:00 solar time) and clear-sky
/// beam + diffuse irradiance on the five orientations.
WeatherSeries synthetic_weather(const SyntheticWeatherOptions& options = {});

/// Linear interpolation of every channel onto a grid of step `dt` covering the
/// same time span.
WeatherSeries resample(const WeatherSeries& weather, double dt);

}  // namespace thermodiag
