// Writes the bundled synthetic weather file.
#include "thermodiag/io.hpp"
#include "thermodiag/weather.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Synthetic clear-sky weather generator", "make_weather"};
  thermodiag::SyntheticWeatherOptions o;
  std::string out;
  app.add_option("--days", o.days, "number of days")->check(CLI::PositiveNumber);
  app.add_option("--dt", o.dt, "time step (s)")->check(CLI::PositiveNumber);
  app.add_option("--latitude", o.latitude_deg, "latitude (deg, south negative)");
  app.add_option("--mean", o.mean_temperature, "mean ambient temperature (degC)");
  app.add_option("--amplitude", o.daily_amplitude, "daily half-amplitude (degC)");
  app.add_option("--out", out, "output file (default stdout)");
  CLI11_PARSE(app, argc, argv);

  const std::string csv = thermodiag::io::write_weather(thermodiag::synthetic_weather(o));
  if (out.empty())
    std::cout << csv;
  else
    thermodiag::io::write_file(out, csv);
  return 0;
}
