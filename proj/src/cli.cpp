#include "thermodiag/cli.hpp"

#include "thermodiag/diagnose.hpp"
#include "thermodiag/error.hpp"
#include "thermodiag/io.hpp"
#include "thermodiag/verify.hpp"
#include "thermodiag/weather.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>

namespace thermodiag::cli {

namespace {

struct RunConfig {
  std::string building, weather, measurements, cases, out;
  int population_size = 30;
  double pc = 0.8;
  double pm = 0.03;
  int generations = 400;
  std::uint64_t seed = 1;
  bool no_elitism = false;
  std::optional<double> dt;
  int skip_steps = 0;
  bool exhaustive = false;
  double noise_sd = 0.0;
  int threads = 1;
  std::vector<std::string> force;
  std::vector<std::string> nodes;
};

ga::GAConfig ga_config(const RunConfig& rc) {
  ga::GAConfig g;
  g.population_size = rc.population_size;
  g.crossover_probability = rc.pc;
  g.mutation_probability = rc.pm;
  g.max_generations = rc.generations;
  g.seed = rc.seed;
  g.elitism = !rc.no_elitism;
  g.threads = rc.threads;
  return g;
}

WeatherSeries load_weather(const RunConfig& rc) {
  WeatherSeries w = io::parse_weather(rc.weather);
  if (rc.dt) w = resample(w, *rc.dt);
  return w;
}

void emit(const RunConfig& rc, const std::string& name, const std::string& contents) {
  io::write_file((std::filesystem::path(rc.out) / name).string(), contents);
}

ForcingSet resolve_nodes(const NodalModel& mesh, const BuildingDescription& desc, const std::vector<std::string>& sel) {
  ForcingSet s;
  for (const auto& x : sel) s.insert(mesh.resolve(desc, x));
  return s;
}

int cmd_simulate(const RunConfig& rc, std::ostream& out) {
  const BuildingDescription desc = io::parse_building(rc.building);
  const WeatherSeries weather = load_weather(rc);
  const NodalModel mesh = build_mesh(desc);
  const StateMatrices sm = assemble(mesh, desc);
  MeasurementSeries meas;
  if (!rc.measurements.empty()) meas = io::parse_measurements(rc.measurements);
  const ForcingSet forcing = resolve_nodes(mesh, desc, rc.force);
  if (forcing.count(mesh.air_node())) throw ModelError("the air node cannot be forced");

  const Eigen::VectorXd t0 = initial_state(sm, weather.inputs(0), forcing, meas);
  const Trajectory traj = simulate(sm, weather, forcing, meas, t0);

  MeasurementSeries result;
  result.dt = weather.dt;
  result.start = weather.start;
  ForcingSet columns = resolve_nodes(mesh, desc, rc.nodes);
  if (columns.empty())
    for (NodeId id = 1; id <= mesh.node_count(); ++id) columns.insert(id);
  for (NodeId id : columns) result.series[id] = traj.node(id);
  const std::string csv = io::write_measurements(result);
  if (rc.out.empty()) {
    out << csv;
  } else {
    std::filesystem::create_directories(rc.out);
    emit(rc, "trajectory.csv", csv);
    std::string nodes = "node,role,location\n";
    for (const auto& n : mesh.nodes)
      nodes += fmt::format("{},{},{}\n", n.id, to_string(n.role), mesh.describe(desc, n.id));
    emit(rc, "nodes.csv", nodes);
    out << fmt::format("simulated {} nodes over {} steps of {} s -> {}\n", mesh.node_count(), traj.steps(), weather.dt,
                       rc.out);
  }
  return kOk;
}

int cmd_diagnose(const RunConfig& rc, std::ostream& out) {
  const DiagnosisProblem problem(io::parse_building(rc.building), load_weather(rc),
                                 io::parse_measurements(rc.measurements), rc.skip_steps);
  const DiagnosisReport report = diagnose(problem, ga_config(rc), rc.exhaustive);
  const std::string table = format_report_table(report, problem);
  out << table;
  if (!rc.out.empty()) {
    std::filesystem::create_directories(rc.out);
    emit(rc, "report.txt", table);
    emit(rc, "report.kv", format_report_kv(report, problem));
    std::string scores = "node,location,J\n";
    scores += fmt::format("none,without forcing,{}\n", report.scores.unforced);
    for (const auto& [id, j] : report.scores.single)
      scores += fmt::format("{},{},{}\n", id, problem.mesh().describe(problem.description(), id), j);
    emit(rc, "scores.csv", scores);
    emit(rc, "ga_history.csv", format_history_csv(report.history));
    emit(rc, "air_temperature.csv", format_air_csv(report, problem));
  }
  return kOk;
}

int cmd_verify(const RunConfig& rc, std::ostream& out) {
  const BuildingDescription reference = io::parse_building(rc.building);
  const WeatherSeries weather = load_weather(rc);
  const verify::CaseFile cases = verify::parse_cases(rc.cases);
  verify::RunOptions options;
  options.exhaustive = rc.exhaustive;
  options.noise.sd = rc.noise_sd;
  options.noise.seed = rc.seed;
  options.skip_steps = rc.skip_steps;

  std::vector<verify::VerificationOutcome> outcomes;
  for (const auto& spec : cases.cases)
    outcomes.push_back(verify::run_case(spec, reference, weather, cases.measured, ga_config(rc), options));
  const std::string table = verify::format_outcomes_table(outcomes);
  out << table;
  if (!rc.out.empty()) {
    std::filesystem::create_directories(rc.out);
    emit(rc, "verify.txt", table);
    emit(rc, "verify.kv", verify::format_outcomes_kv(outcomes));
  }
  for (const auto& o : outcomes)
    if (!o.pass) return kVerificationFailed;
  return kOk;
}

int cmd_stats(const RunConfig& rc, std::ostream& out) {
  const DiagnosisProblem problem(io::parse_building(rc.building), load_weather(rc),
                                 io::parse_measurements(rc.measurements), rc.skip_steps);
  const ForcingSet forcing = resolve_nodes(problem.mesh(), problem.description(), rc.force);
  const auto before = problem.air_series({});
  const auto after = problem.air_series(forcing);
  const ResidualStats sb = residual_stats(before.first, before.second);
  const ResidualStats sa = residual_stats(after.first, after.second);
  out << fmt::format("forcing_set = {}\n", format_forcing_set(forcing));
  out << fmt::format("samples = {}\n", before.first.size());
  out << fmt::format("unforced.J = {}\nunforced.mean = {}\nunforced.sd = {}\n", objective(before.first, before.second),
                     sb.mean, sb.sd);
  out << fmt::format("forced.J = {}\nforced.mean = {}\nforced.sd = {}\n", objective(after.first, after.second), sa.mean,
                     sa.sd);
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Nodal building thermal simulation and GA localization of defective sub-models", "thermodiag"};
  app.require_subcommand(1);
  RunConfig rc;

  auto add_ga = [&](CLI::App* c) {
    c->add_option("--pop-size", rc.population_size, "GA population size (even)")->check(CLI::Range(2, 1000000));
    c->add_option("--pc", rc.pc, "crossover probability")->check(CLI::Range(0.0, 1.0));
    c->add_option("--pm", rc.pm, "per-bit mutation probability")->check(CLI::Range(0.0, 1.0));
    c->add_option("--generations", rc.generations, "maximum number of generations")->check(CLI::NonNegativeNumber);
    c->add_option("--seed", rc.seed, "random seed");
    c->add_flag("--no-elitism", rc.no_elitism, "do not carry the best individual over");
    c->add_option("--threads", rc.threads, "parallel objective evaluations")->check(CLI::Range(1, 1024));
    c->add_flag("--exhaustive", rc.exhaustive, "also score every subset of measured nodes");
  };
  auto add_common = [&](CLI::App* c) {
    c->add_option("--building", rc.building, "building description file")->required();
    c->add_option("--weather", rc.weather, "weather CSV")->required();
    c->add_option("--dt", rc.dt, "time step in seconds (weather is resampled)")->check(CLI::PositiveNumber);
    c->add_option("--out", rc.out, "output directory");
  };

  auto* sim = app.add_subcommand("simulate", "run the model, optionally forcing measured nodes");
  add_common(sim);
  sim->add_option("--measurements", rc.measurements, "measurement CSV (needed with --force)");
  sim->add_option("--force", rc.force, "nodes to force (ids or selectors such as door:inside)")->delimiter(',');
  sim->add_option("--nodes", rc.nodes, "nodes to write (default: all)")->delimiter(',');

  auto* diag = app.add_subcommand("diagnose", "GA search for the forcing set that best explains the air temperature");
  add_common(diag);
  diag->add_option("--measurements", rc.measurements, "measurement CSV")->required();
  diag->add_option("--skip-steps", rc.skip_steps, "samples excluded from J at the start")->check(CLI::NonNegativeNumber);
  add_ga(diag);

  auto* ver = app.add_subcommand("verify", "defect-injection verification cases");
  add_common(ver);
  ver->add_option("--cases", rc.cases, "case definition file")->required();
  ver->add_option("--noise-sd", rc.noise_sd, "Gaussian noise on pseudo-measurements (degC)")->check(CLI::NonNegativeNumber);
  ver->add_option("--skip-steps", rc.skip_steps, "samples excluded from J at the start")->check(CLI::NonNegativeNumber);
  add_ga(ver);

  auto* st = app.add_subcommand("stats", "air-temperature residual statistics with and without forcing");
  add_common(st);
  st->add_option("--measurements", rc.measurements, "measurement CSV")->required();
  st->add_option("--force", rc.force, "nodes to force")->delimiter(',');
  st->add_option("--skip-steps", rc.skip_steps, "samples excluded at the start")->check(CLI::NonNegativeNumber);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (rc.population_size % 2 != 0) throw ModelError("--pop-size must be even");
    if (*sim) return cmd_simulate(rc, out);
    if (*diag) return cmd_diagnose(rc, out);
    if (*ver) return cmd_verify(rc, out);
    return cmd_stats(rc, out);
  } catch (const ParseError& e) {
    err << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const ModelError& e) {
    err << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumericalError;
  } catch (const std::exception& e) {
    // Evaluator failures arrive wrapped; classify by the wrapped text.
    const std::string what = e.what();
    err << "error: " << what << "\n";
    return what.find("singular") != std::string::npos || what.find("residual") != std::string::npos ||
                   what.find("non-finite") != std::string::npos
               ? kNumericalError
               : kInputError;
  }
}

}  // namespace thermodiag::cli
