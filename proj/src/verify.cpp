#include "thermodiag/verify.hpp"

#include "thermodiag/error.hpp"
#include "thermodiag/io.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

namespace thermodiag::verify {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::vector<std::string> words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

double* layer_field(Layer& l, const std::string& f) {
  if (f == "thickness") return &l.thickness;
  if (f == "conductivity") return &l.conductivity;
  if (f == "density") return &l.density;
  if (f == "specific_heat") return &l.specific_heat;
  return nullptr;
}

double* component_field(EnvelopeComponent& c, const std::string& f) {
  if (f == "h_ci") return &c.h_ci;
  if (f == "h_ce") return &c.h_ce;
  if (f == "h_ri") return &c.h_ri;
  if (f == "h_re") return &c.h_re;
  if (f == "absorptivity") return &c.absorptivity;
  if (f == "area") return &c.area;
  return nullptr;
}

// Every parameter slot a target path addresses.
std::vector<double*> resolve_target(BuildingDescription& d, const std::string& target) {
  const auto dot = target.find('.');
  if (dot == std::string::npos) {
    std::vector<double*> all;
    if (target == "h_ci" || target == "h_ce" || target == "h_ri" || target == "h_re")
      for (auto& c : d.components) all.push_back(component_field(c, target));
    if (all.empty()) throw ModelError("unknown defect target '" + target + "'");
    return all;
  }
  const std::string head = target.substr(0, dot);
  const std::string rest = target.substr(dot + 1);
  if (head == "zone") {
    if (rest == "capacity") return {&d.zone.capacity};
    if (rest == "ventilation_rate") return {&d.zone.ventilation_rate};
    throw ModelError("unknown defect target '" + target + "'");
  }
  EnvelopeComponent* c = d.find(head);
  if (!c) throw ModelError("defect target '" + target + "': no component named '" + head + "'");
  if (rest.rfind("layer", 0) == 0) {
    const auto dot2 = rest.find('.');
    int k = 0;
    const std::string index = rest.substr(5, dot2 == std::string::npos ? std::string::npos : dot2 - 5);
    auto [p, ec] = std::from_chars(index.data(), index.data() + index.size(), k);
    if (dot2 == std::string::npos || ec != std::errc() || p != index.data() + index.size() || k < 1 ||
        k > static_cast<int>(c->layers.size()))
      throw ModelError("defect target '" + target + "': bad layer reference");
    double* f = layer_field(c->layers[k - 1], rest.substr(dot2 + 1));
    if (!f) throw ModelError("defect target '" + target + "': unknown layer field");
    return {f};
  }
  double* f = component_field(*c, rest);
  if (!f) throw ModelError("defect target '" + target + "': unknown component field");
  return {f};
}

bool same_value(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b)); }

}  // namespace

CaseFile parse_cases_text(const std::string& text, const std::string& source) {
  CaseFile file;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  DefectSpec* current = nullptr;
  std::set<std::string> keys;
  int header_line = 0;
  std::set<std::string> ids;

  auto finish = [&]() {
    if (!current) return;
    if (!keys.count("expect")) throw ParseError(source, header_line, "case '" + current->id + "': missing 'expect'");
    if (current->is_control()) {
      if (keys.count("target") || keys.count("base") || keys.count("perturbed"))
        throw ParseError(source, header_line, "case '" + current->id + "': a control case takes no target");
      return;
    }
    for (const char* k : {"target", "base", "perturbed"})
      if (!keys.count(k)) throw ParseError(source, header_line, fmt::format("case '{}': missing '{}'", current->id, k));
    if (current->base == current->perturbed)
      throw ParseError(source, header_line, "case '" + current->id + "': perturbed value equals base value");
  };

  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      const auto w = words(line.substr(1, line.size() - (line.back() == ']' ? 2 : 1)));
      if (line.back() != ']' || w.size() != 2 || w[0] != "case")
        throw ParseError(source, line_no, "expected section header '[case <id>]'");
      finish();
      if (!ids.insert(w[1]).second) throw ParseError(source, line_no, "duplicate case id '" + w[1] + "'");
      file.cases.emplace_back();
      current = &file.cases.back();
      current->id = w[1];
      keys.clear();
      header_line = line_no;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(source, line_no, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!current) {
      if (key != "measured") throw ParseError(source, line_no, "unknown top-level field '" + key + "'");
      file.measured = words(value);
      if (file.measured.empty()) throw ParseError(source, line_no, "'measured' lists no nodes");
      continue;
    }
    if (!keys.insert(key).second) throw ParseError(source, line_no, "duplicate field '" + key + "'");
    if (key == "target") {
      if (value.empty()) throw ParseError(source, line_no, "empty target");
      current->target = value;
    } else if (key == "base" || key == "perturbed") {
      double v = 0.0;
      auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
      if (value.empty() || ec != std::errc() || p != value.data() + value.size() || !std::isfinite(v))
        throw ParseError(source, line_no, "'" + key + "' must be a number (got '" + value + "')");
      (key == "base" ? current->base : current->perturbed) = v;
    } else if (key == "expect") {
      const auto w = words(value);
      if (w.size() == 2 && w[0] == "localize") {
        current->expect = Expectation::Localize;
        current->expected_component = w[1];
      } else if (w.size() == 1 && w[0] == "none") {
        current->expect = Expectation::None;
      } else if (w.size() == 1 && w[0] == "control") {
        current->expect = Expectation::Control;
      } else {
        throw ParseError(source, line_no, "expect must be 'localize <component>', 'none' or 'control'");
      }
    } else {
      throw ParseError(source, line_no, "unknown field '" + key + "'");
    }
  }
  finish();
  if (file.measured.empty()) throw ParseError(source, 0, "missing 'measured = ...' line");
  if (file.cases.empty()) throw ParseError(source, 0, "no cases");
  return file;
}

CaseFile parse_cases(const std::string& path) { return parse_cases_text(io::read_file(path), path); }

BuildingDescription inject_defect(const BuildingDescription& desc, const DefectSpec& spec) {
  if (spec.is_control()) return desc;
  if (spec.base == spec.perturbed) throw ModelError("defect '" + spec.id + "': perturbed value equals base value");
  BuildingDescription out = desc;
  for (double* slot : resolve_target(out, spec.target)) {
    if (!same_value(*slot, spec.base))
      throw ModelError(fmt::format("defect '{}': target '{}' holds {}, not the base value {}", spec.id, spec.target,
                                   *slot, spec.base));
    *slot = spec.perturbed;
  }
  try {
    validate(out);
  } catch (const ModelError& e) {
    throw ModelError(fmt::format("defect '{}': perturbed value {} is out of range: {}", spec.id, spec.perturbed, e.what()));
  }
  return out;
}

MeasurementSeries generate_pseudo_measurements(const BuildingDescription& reference, const WeatherSeries& weather,
                                               const std::vector<NodeId>& measured, const NoiseOptions& noise) {
  const NodalModel mesh = build_mesh(reference);
  const StateMatrices sm = assemble(mesh, reference);
  const MeasurementSeries none;
  const Trajectory traj = simulate(sm, weather, {}, none, initial_state(sm, weather.inputs(0)));

  MeasurementSeries out;
  out.dt = weather.dt;
  out.start = weather.start;
  std::set<NodeId> ids(measured.begin(), measured.end());
  ids.insert(mesh.air_node());
  for (NodeId id : ids) {
    if (id < 1 || id > mesh.node_count()) throw ModelError(fmt::format("measured node {} out of range", id));
    out.series[id] = traj.node(id);
  }
  if (noise.sd > 0.0) {
    std::mt19937_64 rng(noise.seed);
    std::normal_distribution<double> gauss(0.0, noise.sd);
    for (auto& [id, s] : out.series)
      for (double& v : s) v += gauss(rng);
  }
  return out;
}

VerificationOutcome run_case(const DefectSpec& spec, const BuildingDescription& reference,
                             const WeatherSeries& weather, const std::vector<std::string>& measured,
                             const ga::GAConfig& config, const RunOptions& options) {
  const NodalModel ref_mesh = build_mesh(reference);
  std::vector<NodeId> ids;
  for (const auto& sel : measured) ids.push_back(ref_mesh.resolve(reference, sel));

  const BuildingDescription perturbed = inject_defect(reference, spec);
  MeasurementSeries meas = generate_pseudo_measurements(reference, weather, ids, options.noise);
  const DiagnosisProblem problem(perturbed, weather, std::move(meas), options.skip_steps);

  ga::GAConfig cfg = config;
  cfg.measurable_mask = problem.measurable_mask();
  auto [best, history] = ga::run_ga(cfg, [&](const ga::Chromosome& c) { return problem.evaluate(c); });

  VerificationOutcome out;
  out.id = spec.id;
  out.best = ga::decode(best.chromosome);
  out.forced_objective = best.objective;
  out.unforced_objective = problem.evaluate(ForcingSet{});
  out.ratio = out.unforced_objective > 0.0 ? out.forced_objective / out.unforced_objective : 0.0;
  out.generations = history.generation_count() - 1;
  if (spec.expect == Expectation::Localize) {
    const EnvelopeComponent* c = reference.find(spec.expected_component);
    if (!c) throw ModelError("case '" + spec.id + "': unknown component '" + spec.expected_component + "'");
    out.expected = {ref_mesh.resolve(reference, spec.expected_component + ":inside")};
  }

  switch (spec.expect) {
    case Expectation::Localize: {
      bool contains = true;
      for (NodeId id : out.expected) contains = contains && out.best.count(id);
      out.pass = contains && out.ratio < kLocalizeRatio;
      break;
    }
    case Expectation::None:
      out.pass = out.best.empty() || out.ratio > kNoneRatio;
      break;
    case Expectation::Control:
      out.pass = out.best.empty() && out.unforced_objective < kControlObjective;
      break;
  }

  if (options.exhaustive) {
    const auto ex = exhaustive_search(problem.measurable_nodes(),
                                      [&](const ForcingSet& s) { return problem.evaluate(s); }, cfg.threads);
    out.oracle_objective = ex.best_objective;
    out.oracle_best = ex.best;
  }
  return out;
}

std::string format_outcomes_table(const std::vector<VerificationOutcome>& outcomes) {
  std::string out = fmt::format("{:<10} {:<16} {:<12} {:>14} {:>14} {:>9} {:<6}\n", "case", "best set", "expected",
                                "J forced", "J unforced", "ratio", "result");
  for (const auto& o : outcomes) {
    out += fmt::format("{:<10} {:<16} {:<12} {:>14.4f} {:>14.4f} {:>9.4f} {:<6}\n", o.id, format_forcing_set(o.best),
                       format_forcing_set(o.expected), o.forced_objective, o.unforced_objective, o.ratio,
                       o.pass ? "PASS" : "FAIL");
    if (o.oracle_objective)
      out += fmt::format("{:<10} oracle best {} with J = {:.4f} ({})\n", "", format_forcing_set(*o.oracle_best),
                         *o.oracle_objective, *o.oracle_objective == o.forced_objective ? "agrees" : "differs");
  }
  return out;
}

std::string format_outcomes_kv(const std::vector<VerificationOutcome>& outcomes) {
  std::string out;
  for (const auto& o : outcomes) {
    const std::string p = "case." + o.id + ".";
    out += p + "best_forcing_set = " + format_forcing_set(o.best) + "\n";
    out += p + "expected = " + format_forcing_set(o.expected) + "\n";
    out += p + fmt::format("J_forced = {}\n", o.forced_objective);
    out += p + fmt::format("J_unforced = {}\n", o.unforced_objective);
    out += p + fmt::format("ratio = {}\n", o.ratio);
    out += p + fmt::format("generations = {}\n", o.generations);
    if (o.oracle_objective) {
      out += p + "oracle_best_forcing_set = " + format_forcing_set(*o.oracle_best) + "\n";
      out += p + fmt::format("oracle_J = {}\n", *o.oracle_objective);
    }
    out += p + "pass = " + (o.pass ? "true" : "false") + "\n";
  }
  return out;
}

}  // namespace thermodiag::verify
