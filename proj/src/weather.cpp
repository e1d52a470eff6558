#include "thermodiag/weather.hpp"

#include "thermodiag/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace thermodiag {

WeatherSeries synthetic_weather(const SyntheticWeatherOptions& o) {
  using std::numbers::pi;
  const double deg = pi / 180.0;
  const double lat = o.latitude_deg * deg;
  const double decl = 23.45 * deg * std::sin(2.0 * pi * (284.0 + o.day_of_year) / 365.0);

  WeatherSeries w;
  w.dt = o.dt;
  w.start = o.start;
  const auto steps = static_cast<std::size_t>(std::llround(o.days * 86400.0 / o.dt));
  w.records.resize(steps);
  for (std::size_t n = 0; n < steps; ++n) {
    const double t = static_cast<double>(n) * o.dt;  // s since start (midnight)
    const double hour = std::fmod(t / 3600.0, 24.0);
    const double day = t / 86400.0;
    auto& r = w.records[n];
    r.ambient = o.mean_temperature + o.daily_drift * day + o.daily_amplitude * std::sin(2.0 * pi * (hour - 9.0) / 24.0);
    r.sky = r.ambient - o.sky_depression;

    // Sun direction in (east, north, up).
    const double omega = 15.0 * deg * (hour - 12.0);
    const double up = std::sin(lat) * std::sin(decl) + std::cos(lat) * std::cos(decl) * std::cos(omega);
    if (up <= 0.01) continue;
    const double east = -std::cos(decl) * std::sin(omega);
    const double north = std::sin(decl) * std::cos(lat) - std::cos(decl) * std::sin(lat) * std::cos(omega);
    const double air_mass = 1.0 / up;
    const double beam = 1353.0 * std::pow(o.clearness, std::pow(air_mass, 0.678));
    const double diffuse_h = 0.12 * beam * up;
    const double global_h = beam * up + diffuse_h;
    const double vertical_diffuse = 0.5 * diffuse_h + 0.5 * 0.2 * global_h;

    r.horizontal = global_h;
    r.north = beam * std::max(0.0, north) + vertical_diffuse;
    r.south = beam * std::max(0.0, -north) + vertical_diffuse;
    r.east = beam * std::max(0.0, east) + vertical_diffuse;
    r.west = beam * std::max(0.0, -east) + vertical_diffuse;
  }
  return w;
}

WeatherSeries resample(const WeatherSeries& w, double dt) {
  if (!(dt > 0.0)) throw ModelError("resample: time step must be > 0");
  if (w.records.size() < 2) throw ModelError("resample: need at least 2 records");
  if (dt == w.dt) return w;
  const double span = w.dt * static_cast<double>(w.records.size() - 1);
  const auto steps = static_cast<std::size_t>(std::floor(span / dt + 1e-9)) + 1;
  WeatherSeries out;
  out.dt = dt;
  out.start = w.start;
  out.records.resize(steps);
  for (std::size_t n = 0; n < steps; ++n) {
    const double pos = static_cast<double>(n) * dt / w.dt;
    const auto k = std::min(static_cast<std::size_t>(pos), w.records.size() - 2);
    const double f = pos - static_cast<double>(k);
    const auto& a = w.records[k];
    const auto& b = w.records[k + 1];
    auto lerp = [f](double x, double y) { return x + f * (y - x); };
    out.records[n] = {lerp(a.ambient, b.ambient), lerp(a.sky, b.sky),     lerp(a.north, b.north),
                      lerp(a.south, b.south),     lerp(a.east, b.east),   lerp(a.west, b.west),
                      lerp(a.horizontal, b.horizontal)};
  }
  return out;
}

}  // namespace thermodiag
