#include "thermodiag/io.hpp"

#include "thermodiag/error.hpp"

#include <fmt/format.h>

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

namespace thermodiag::io {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string strip_comment(const std::string& s) {
  const auto p = s.find('#');
  return p == std::string::npos ? s : s.substr(0, p);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(trim(cur));
  return out;
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == '\n') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

bool to_double(const std::string& s, double& v) {
  if (s.empty()) return false;
  const char* first = s.data();
  if (*first == '+') ++first;
  auto [p, ec] = std::from_chars(first, s.data() + s.size(), v);
  return ec == std::errc() && p == s.data() + s.size() && std::isfinite(v);
}

bool to_int(const std::string& s, int& v) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return !s.empty() && ec == std::errc() && p == s.data() + s.size();
}

std::string num(double v) { return fmt::format("{}", v); }

// --- building ---------------------------------------------------------------

struct FieldCtx {
  const std::string& source;
  int line;
  std::string section;
};

double need_double(const FieldCtx& c, const std::string& key, const std::string& value) {
  double v = 0.0;
  if (!to_double(value, v))
    throw ParseError(c.source, c.line, fmt::format("[{}] {}: expected a number, got '{}'", c.section, key, value));
  return v;
}

void need_range(const FieldCtx& c, const std::string& key, double v, double lo, double hi, bool open_lo) {
  const bool ok = (open_lo ? v > lo : v >= lo) && v <= hi;
  if (!ok) {
    const std::string range = hi == HUGE_VAL ? (open_lo ? "> " : ">= ") + num(lo)
                                             : fmt::format("in [{}, {}]", num(lo), num(hi));
    throw ParseError(c.source, c.line, fmt::format("[{}] {} must be {} (got {})", c.section, key, range, num(v)));
  }
}

Orientation parse_orientation(const FieldCtx& c, const std::string& v) {
  static const std::map<std::string, Orientation> names{
      {"N", Orientation::North},           {"S", Orientation::South},
      {"E", Orientation::East},            {"W", Orientation::West},
      {"horizontal-up", Orientation::HorizontalUp}, {"horizontal-down", Orientation::HorizontalDown}};
  auto it = names.find(v);
  if (it == names.end())
    throw ParseError(c.source, c.line,
                     fmt::format("[{}] orientation must be one of N, S, E, W, horizontal-up, horizontal-down (got '{}')",
                                 c.section, v));
  return it->second;
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path, 0, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << contents;
  if (!out) throw std::runtime_error("error while writing " + path);
}

BuildingDescription parse_building_text(const std::string& text, const std::string& source) {
  BuildingDescription desc;
  enum class Section { None, Zone, Component } section = Section::None;
  std::string section_name;
  std::set<std::string> seen_keys;
  bool have_zone = false;
  std::map<std::string, int> component_line;

  static const std::set<std::string> component_required{
      "orientation", "area", "layer", "h_ci", "h_ce", "h_ri", "h_re", "absorptivity"};
  static const std::set<std::string> zone_required{"capacity", "ventilation_rate", "glazing_transmitted_fraction"};

  auto close_section = [&](int line) {
    const auto& required = section == Section::Zone ? zone_required : component_required;
    if (section == Section::None) return;
    for (const auto& k : required)
      if (!seen_keys.count(k))
        throw ParseError(source, line, fmt::format("[{}] missing required field '{}'", section_name, k));
  };

  const auto lines = lines_of(text);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const int line_no = static_cast<int>(ln) + 1;
    const std::string line = trim(strip_comment(lines[ln]));
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(source, line_no, "unterminated section header");
      close_section(line_no);
      const auto words = split_ws(line.substr(1, line.size() - 2));
      seen_keys.clear();
      if (words.size() == 1 && words[0] == "zone") {
        if (have_zone) throw ParseError(source, line_no, "duplicate [zone] section");
        have_zone = true;
        section = Section::Zone;
        section_name = "zone";
      } else if (words.size() == 2 && words[0] == "component") {
        if (component_line.count(words[1]))
          throw ParseError(source, line_no, fmt::format("duplicate component name '{}'", words[1]));
        component_line[words[1]] = line_no;
        section = Section::Component;
        section_name = "component " + words[1];
        desc.components.emplace_back();
        desc.components.back().name = words[1];
      } else {
        throw ParseError(source, line_no, "unknown section '" + line + "' (expected [zone] or [component <name>])");
      }
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(source, line_no, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section == Section::None) throw ParseError(source, line_no, "field '" + key + "' outside of any section");
    if (key != "layer" && !seen_keys.insert(key).second)
      throw ParseError(source, line_no, fmt::format("[{}] duplicate field '{}'", section_name, key));
    seen_keys.insert(key);
    const FieldCtx ctx{source, line_no, section_name};

    if (section == Section::Zone) {
      auto& z = desc.zone;
      if (key == "capacity") {
        z.capacity = need_double(ctx, key, value);
        need_range(ctx, key, z.capacity, 0.0, HUGE_VAL, true);
      } else if (key == "air_specific_heat") {
        z.air_specific_heat = need_double(ctx, key, value);
        need_range(ctx, key, z.air_specific_heat, 0.0, HUGE_VAL, true);
      } else if (key == "ventilation_rate") {
        z.ventilation_rate = need_double(ctx, key, value);
        need_range(ctx, key, z.ventilation_rate, 0.0, HUGE_VAL, false);
      } else if (key == "glazing_transmitted_fraction") {
        desc.glazing_transmitted_fraction = need_double(ctx, key, value);
        need_range(ctx, key, desc.glazing_transmitted_fraction, 0.0, 1.0, false);
      } else {
        throw ParseError(source, line_no, "[zone] unknown field '" + key + "'");
      }
      continue;
    }

    auto& c = desc.components.back();
    if (key == "orientation") {
      c.orientation = parse_orientation(ctx, value);
    } else if (key == "area") {
      c.area = need_double(ctx, key, value);
      need_range(ctx, key, c.area, 0.0, HUGE_VAL, true);
    } else if (key == "layer") {
      const auto f = split_ws(value);
      if (f.size() != 4)
        throw ParseError(source, line_no,
                         fmt::format("[{}] layer needs 4 numbers: thickness conductivity density specific_heat",
                                     section_name));
      static const char* names[] = {"layer thickness", "layer conductivity", "layer density", "layer specific_heat"};
      double v[4];
      for (int k = 0; k < 4; ++k) {
        v[k] = need_double(ctx, names[k], f[k]);
        need_range(ctx, names[k], v[k], 0.0, HUGE_VAL, true);
      }
      c.layers.push_back({v[0], v[1], v[2], v[3]});
    } else if (key == "internal_nodes") {
      if (!to_int(value, c.internal_node_count) || c.internal_node_count < 0)
        throw ParseError(source, line_no,
                         fmt::format("[{}] internal_nodes must be a non-negative integer (got '{}')", section_name, value));
    } else if (key == "h_ci" || key == "h_ce" || key == "h_ri" || key == "h_re") {
      const double v = need_double(ctx, key, value);
      need_range(ctx, key, v, 0.0, HUGE_VAL, false);
      (key == "h_ci" ? c.h_ci : key == "h_ce" ? c.h_ce : key == "h_ri" ? c.h_ri : c.h_re) = v;
    } else if (key == "absorptivity") {
      c.absorptivity = need_double(ctx, key, value);
      need_range(ctx, key, c.absorptivity, 0.0, 1.0, false);
    } else if (key == "boundary") {
      if (value == "ambient")
        c.outside_boundary = OutsideBoundary::Ambient;
      else if (value == "null-flux")
        c.outside_boundary = OutsideBoundary::NullFlux;
      else
        throw ParseError(source, line_no,
                         fmt::format("[{}] boundary must be 'ambient' or 'null-flux' (got '{}')", section_name, value));
    } else if (key == "window") {
      if (value == "yes" || value == "true")
        c.window = true;
      else if (value == "no" || value == "false")
        c.window = false;
      else
        throw ParseError(source, line_no, fmt::format("[{}] window must be yes or no (got '{}')", section_name, value));
    } else {
      throw ParseError(source, line_no, fmt::format("[{}] unknown field '{}'", section_name, key));
    }
  }
  close_section(static_cast<int>(lines.size()));
  if (!have_zone) throw ParseError(source, 0, "missing [zone] section");
  if (desc.components.empty()) throw ParseError(source, 0, "no [component] sections");

  try {
    validate(desc);
  } catch (const ModelError& e) {
    // Point at the component header when the message names one.
    int line = 0;
    for (const auto& [name, l] : component_line)
      if (std::string(e.what()).find("'" + name + "'") != std::string::npos) line = l;
    throw ParseError(source, line, e.what());
  }
  return desc;
}

BuildingDescription parse_building(const std::string& path) { return parse_building_text(read_file(path), path); }

std::string write_building(const BuildingDescription& desc) {
  std::string out;
  out += "[zone]\n";
  out += "capacity = " + num(desc.zone.capacity) + "\n";
  out += "air_specific_heat = " + num(desc.zone.air_specific_heat) + "\n";
  out += "ventilation_rate = " + num(desc.zone.ventilation_rate) + "\n";
  out += "glazing_transmitted_fraction = " + num(desc.glazing_transmitted_fraction) + "\n";
  for (const auto& c : desc.components) {
    out += "\n[component " + c.name + "]\n";
    out += "orientation = " + to_string(c.orientation) + "\n";
    out += "area = " + num(c.area) + "\n";
    for (const auto& l : c.layers)
      out += fmt::format("layer = {} {} {} {}\n", l.thickness, l.conductivity, l.density, l.specific_heat);
    out += "internal_nodes = " + std::to_string(c.internal_node_count) + "\n";
    out += "h_ci = " + num(c.h_ci) + "\n";
    out += "h_ce = " + num(c.h_ce) + "\n";
    out += "h_ri = " + num(c.h_ri) + "\n";
    out += "h_re = " + num(c.h_re) + "\n";
    out += "absorptivity = " + num(c.absorptivity) + "\n";
    out += std::string("boundary = ") + (c.outside_boundary == OutsideBoundary::NullFlux ? "null-flux" : "ambient") + "\n";
    out += std::string("window = ") + (c.window ? "yes" : "no") + "\n";
  }
  return out;
}

// --- timestamps ---------------------------------------------------------------

std::int64_t parse_timestamp(const std::string& text) {
  std::string s = text;
  if (!s.empty() && (s.back() == 'Z' || s.back() == 'z')) s.pop_back();
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
  auto field = [&](std::size_t pos, std::size_t len, int& out) {
    if (pos + len > s.size()) return false;
    const std::string part = s.substr(pos, len);
    return to_int(part, out) && part.find('-') == std::string::npos && part.find('+') == std::string::npos;
  };
  const bool ok_date = s.size() >= 16 && field(0, 4, y) && s[4] == '-' && field(5, 2, mo) && s[7] == '-' &&
                       field(8, 2, d) && (s[10] == 'T' || s[10] == ' ') && field(11, 2, h) && s[13] == ':' &&
                       field(14, 2, mi);
  bool ok = ok_date && (s.size() == 16 || (s.size() == 19 && s[16] == ':' && field(17, 2, sec)));
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  ok = ok && ymd.ok() && h < 24 && mi < 60 && sec < 61;
  if (!ok) throw std::invalid_argument("bad ISO-8601 timestamp '" + text + "'");
  const auto days = sys_days{ymd}.time_since_epoch().count();
  return static_cast<std::int64_t>(days) * 86400 + h * 3600 + mi * 60 + sec;
}

std::string format_timestamp(std::int64_t seconds) {
  using namespace std::chrono;
  std::int64_t days = seconds / 86400;
  std::int64_t rem = seconds % 86400;
  if (rem < 0) {
    rem += 86400;
    --days;
  }
  const year_month_day ymd{sys_days{std::chrono::days{days}}};
  return fmt::format("{:04}-{:02}-{:02}T{:02}:{:02}:{:02}", static_cast<int>(ymd.year()),
                     static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), rem / 3600, rem / 60 % 60,
                     rem % 60);
}

// --- CSV series ---------------------------------------------------------------

namespace {

struct Table {
  std::vector<std::string> header;
  std::vector<std::int64_t> times;
  std::vector<std::vector<double>> columns;  // excludes timestamp
  double dt = 0.0;
};

Table parse_csv_series(const std::string& text, const std::string& source) {
  Table t;
  const auto lines = lines_of(text);
  std::size_t ln = 0;
  while (ln < lines.size() && trim(lines[ln]).empty()) ++ln;
  if (ln == lines.size()) throw ParseError(source, 0, "empty file");
  t.header = split(trim(lines[ln]), ',');
  const int header_line = static_cast<int>(ln) + 1;
  if (t.header.empty() || t.header[0] != "timestamp")
    throw ParseError(source, header_line, "first column must be 'timestamp'");
  {
    std::set<std::string> seen;
    for (const auto& h : t.header)
      if (!seen.insert(h).second) throw ParseError(source, header_line, "duplicate column '" + h + "'");
  }
  t.columns.resize(t.header.size() - 1);
  for (++ln; ln < lines.size(); ++ln) {
    const std::string line = trim(lines[ln]);
    const int line_no = static_cast<int>(ln) + 1;
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != t.header.size())
      throw ParseError(source, line_no,
                       fmt::format("expected {} columns, found {}", t.header.size(), cells.size()));
    try {
      t.times.push_back(parse_timestamp(cells[0]));
    } catch (const std::invalid_argument& e) {
      throw ParseError(source, line_no, e.what());
    }
    for (std::size_t k = 1; k < cells.size(); ++k) {
      double v = 0.0;
      if (!to_double(cells[k], v))
        throw ParseError(source, line_no, fmt::format("column '{}': missing or non-numeric value '{}'", t.header[k], cells[k]));
      t.columns[k - 1].push_back(v);
    }
    const std::size_t n = t.times.size();
    if (n >= 2) {
      const std::int64_t step = t.times[n - 1] - t.times[n - 2];
      if (step <= 0) throw ParseError(source, line_no, "timestamps are not strictly increasing");
      if (n == 2) {
        t.dt = static_cast<double>(step);
      } else if (static_cast<double>(step) != t.dt) {
        throw ParseError(source, line_no,
                         fmt::format("non-uniform sampling: step {} s where {} s was expected", step, t.dt));
      }
    }
  }
  if (t.times.size() < 2) throw ParseError(source, 0, "need at least 2 records");
  return t;
}

}  // namespace

WeatherSeries parse_weather_text(const std::string& text, const std::string& source) {
  const Table t = parse_csv_series(text, source);
  static const std::vector<std::string> required{"T_ae", "T_sky", "I_N", "I_S", "I_E", "I_W", "I_H"};
  std::vector<int> idx;
  for (const auto& name : required) {
    int found = -1;
    for (std::size_t k = 1; k < t.header.size(); ++k)
      if (t.header[k] == name) found = static_cast<int>(k) - 1;
    if (found < 0) throw ParseError(source, 1, "missing column '" + name + "'");
    idx.push_back(found);
  }
  WeatherSeries w;
  w.dt = t.dt;
  w.start = t.times.front();
  w.records.resize(t.times.size());
  for (std::size_t n = 0; n < t.times.size(); ++n) {
    auto& r = w.records[n];
    r.ambient = t.columns[idx[0]][n];
    r.sky = t.columns[idx[1]][n];
    double* flux[] = {&r.north, &r.south, &r.east, &r.west, &r.horizontal};
    for (int k = 0; k < 5; ++k) {
      const double v = t.columns[idx[k + 2]][n];
      if (v < 0.0)
        throw ParseError(source, static_cast<int>(n) + 2,
                         fmt::format("column '{}': solar flux must be >= 0 (got {})", required[k + 2], v));
      *flux[k] = v;
    }
  }
  return w;
}

WeatherSeries parse_weather(const std::string& path) { return parse_weather_text(read_file(path), path); }

std::string write_weather(const WeatherSeries& w) {
  std::string out = "timestamp,T_ae,T_sky,I_N,I_S,I_E,I_W,I_H\n";
  for (std::size_t n = 0; n < w.records.size(); ++n) {
    const auto& r = w.records[n];
    out += fmt::format("{},{},{},{},{},{},{},{}\n",
                       format_timestamp(w.start + static_cast<std::int64_t>(std::llround(n * w.dt))), r.ambient, r.sky,
                       r.north, r.south, r.east, r.west, r.horizontal);
  }
  return out;
}

MeasurementSeries parse_measurements_text(const std::string& text, const std::string& source) {
  const Table t = parse_csv_series(text, source);
  MeasurementSeries m;
  m.dt = t.dt;
  m.start = t.times.front();
  for (std::size_t k = 1; k < t.header.size(); ++k) {
    const std::string& h = t.header[k];
    int id = 0;
    if (h.rfind("node_", 0) != 0 || !to_int(h.substr(5), id) || id < 1)
      throw ParseError(source, 1, "measurement column '" + h + "' must be named node_<id> with id >= 1");
    m.series[id] = t.columns[k - 1];
  }
  if (m.series.empty()) throw ParseError(source, 1, "no node columns");
  return m;
}

MeasurementSeries parse_measurements(const std::string& path) { return parse_measurements_text(read_file(path), path); }

std::string write_measurements(const MeasurementSeries& m) {
  std::string out = "timestamp";
  for (const auto& [id, s] : m.series) out += fmt::format(",node_{}", id);
  out += "\n";
  for (std::size_t n = 0; n < m.length(); ++n) {
    out += format_timestamp(m.start + static_cast<std::int64_t>(std::llround(n * m.dt)));
    for (const auto& [id, s] : m.series) out += fmt::format(",{}", s[n]);
    out += "\n";
  }
  return out;
}

}  // namespace thermodiag::io
