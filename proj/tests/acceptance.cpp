// Acceptance suite: one PASS/FAIL line per criterion; exit status 1 if any fails.

#include "fixtures.hpp"
#include "thermodiag/cli.hpp"
#include "thermodiag/diagnose.hpp"
#include "thermodiag/ga.hpp"
#include "thermodiag/io.hpp"
#include "thermodiag/verify.hpp"

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>

using namespace thermodiag;
namespace fs = std::filesystem;

namespace {

struct Check {
  bool pass;
  std::string detail;
};

const verify::CaseFile& cases() {
  static const verify::CaseFile f = verify::parse_cases(fixtures::data("verify_cases.txt"));
  return f;
}

const verify::DefectSpec& case_by_id(const std::string& id) {
  for (const auto& c : cases().cases)
    if (c.id == id) return c;
  throw std::runtime_error("missing case " + id);
}

std::vector<NodeId> measured_ids(const BuildingDescription& desc) {
  const auto mesh = build_mesh(desc);
  std::vector<NodeId> ids;
  for (const auto& s : cases().measured) ids.push_back(mesh.resolve(desc, s));
  return ids;
}

DiagnosisProblem case_problem(const std::string& id) {
  const auto ref = fixtures::test_cell();
  const auto w = fixtures::weather();
  const auto& spec = case_by_id(id);
  const auto model = spec.is_control() ? ref : verify::inject_defect(ref, spec);
  return DiagnosisProblem(model, w, verify::generate_pseudo_measurements(ref, w, measured_ids(ref)));
}

bool same_objective(double a, double b) { return a == b || (a < ga::kZeroObjective && b < ga::kZeroObjective); }

Check oracle_equivalence() {
  std::string detail;
  bool pass = true;
  double slowest = 0.0;
  for (const std::string id : {"1", "2", "3", "control"}) {
    const auto p = case_problem(id);
    const auto oracle = exhaustive_search(p.measurable_nodes(), [&](const ForcingSet& s) { return p.evaluate(s); });
    int agree = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      ga::GAConfig cfg;
      cfg.seed = seed;
      cfg.measurable_mask = p.measurable_mask();
      const auto t0 = std::chrono::steady_clock::now();
      const auto [best, history] = ga::run_ga(cfg, [&](const ga::Chromosome& c) { return p.evaluate(c); });
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      slowest = std::max(slowest, secs);
      if (secs >= 60.0) pass = false;
      if (same_objective(best.objective, oracle.best_objective)) ++agree;
    }
    if (agree < 19) pass = false;
    detail += fmt::format("case {}: {}/20; ", id, agree);
  }
  detail += fmt::format("slowest run {:.2f} s (limit 60 s)", slowest);
  return {pass, detail};
}

Check localization(const std::string& id, NodeId expected_node) {
  const auto o = verify::run_case(case_by_id(id), fixtures::test_cell(), fixtures::weather(), cases().measured,
                                  ga::GAConfig{});
  const bool pass = o.best.count(expected_node) && o.ratio < 0.2;
  return {pass, fmt::format("best set {{{}}}, J(best) {:.6g}, J(empty) {:.6g}, ratio {:.4g} (< 0.2, node {} required)",
                            format_forcing_set(o.best), o.forced_objective, o.unforced_objective, o.ratio,
                            expected_node)};
}

Check no_localization() {
  const auto o = verify::run_case(case_by_id("2"), fixtures::test_cell(), fixtures::weather(), cases().measured,
                                  ga::GAConfig{});
  const bool pass = o.best.empty() || o.ratio > 0.9;
  return {pass, fmt::format("best set {{{}}}, J(best) {:.6g}, J(empty) {:.6g}, ratio {:.4g} (empty or > 0.9)",
                            format_forcing_set(o.best), o.forced_objective, o.unforced_objective, o.ratio)};
}

Check forcing_exactness() {
  const auto p = case_problem("1");
  const auto nodes = p.measurable_nodes();
  const ForcingSet forcing(nodes.begin(), nodes.end());
  const auto traj = p.run(forcing);
  bool pass = traj.steps() == 480;
  std::size_t compared = 0;
  for (NodeId id : forcing) {
    const auto sim = traj.node(id);
    const auto& meas = p.measurements().at(id);
    for (std::size_t n = 0; n < sim.size(); ++n, ++compared)
      if (std::memcmp(&sim[n], &meas[n], sizeof(double)) != 0) pass = false;
  }
  return {pass, fmt::format("{} forced nodes x {} steps, {} values compared bitwise", forcing.size(), traj.steps(),
                            compared)};
}

Check physics_sanity() {
  const auto desc = fixtures::test_cell();
  const auto sm = assemble(build_mesh(desc), desc);
  const double t0 = 20.0;
  WeatherSeries w;
  w.records.assign(3000, WeatherRecord{t0, t0, 0, 0, 0, 0, 0});
  const Eigen::VectorXd start = Eigen::VectorXd::LinSpaced(sm.node_count(), 0.0, 40.0);
  const auto traj = simulate(sm, w, {}, {}, start);
  const double dev = (traj.temperatures.col(traj.steps() - 1).array() - t0).abs().maxCoeff();

  // One node of capacity C to ambient through G.
  StateMatrices rc;
  const double c = 3.6e6, g = 100.0, ta = 10.0, ti = 30.0;
  rc.capacity = Eigen::VectorXd::Constant(1, c);
  rc.A = Eigen::MatrixXd::Constant(1, 1, -g);
  rc.B = Eigen::MatrixXd::Zero(1, kChannelCount);
  rc.B(0, kAmbient) = g;
  WeatherSeries wr;
  wr.dt = 900.0;
  wr.records.assign(481, WeatherRecord{ta, ta, 0, 0, 0, 0, 0});
  const auto r = simulate(rc, wr, {}, {}, Eigen::VectorXd::Constant(1, ti));
  double worst = 0.0;
  for (int n = 0; n < r.steps(); ++n) {
    const double exact = ta + (ti - ta) * std::exp(-n * wr.dt * g / c);
    worst = std::max(worst, std::abs(r.temperatures(0, n) - exact) / std::abs(ti - ta));
  }
  return {dev < 1e-6 && worst <= 0.02,
          fmt::format("{} nodes max |T - T0| {:.3g} degC (< 1e-6); RC max error {:.3g}% of step (<= 2%)",
                      sm.node_count(), dev, 100.0 * worst)};
}

Check self_consistency() {
  const auto p = case_problem("control");
  const double empty = p.evaluate(ForcingSet{});
  ga::GAConfig cfg;
  cfg.measurable_mask = p.measurable_mask();
  const auto [best, history] = ga::run_ga(cfg, [&](const ga::Chromosome& c) { return p.evaluate(c); });
  const bool pass = empty < 1e-18 && best.chromosome.popcount() == 0;
  return {pass, fmt::format("J(empty) {:.3g} (< 1e-18), GA best set {{{}}}", empty,
                            format_forcing_set(ga::decode(best.chromosome)))};
}

Check ga_properties() {
  using namespace ga;
  std::vector<std::string> failed;

  bool mono = fitness(0.0) == 1.0;
  double prev = 1.0;
  for (double j = 1e-9; j < 1e9; j *= 1.3) {
    mono = mono && fitness(j) < prev;
    prev = fitness(j);
  }
  if (!mono) failed.push_back("fitness monotonicity");

  Rng rng(2024);
  const std::vector<ScoredIndividual> pop{{Chromosome(1), 0.0, 3.0}, {Chromosome(1), 0.0, 1.0}};
  int first = 0;
  for (int k = 0; k < 10000; ++k) first += &select_roulette(pop, rng) == &pop[0];
  const double freq = first / 10000.0;
  if (std::abs(freq - 0.75) > 0.02) failed.push_back("roulette");

  std::vector<bool> mask(22, false);
  for (int i : {2, 13, 15, 18, 19}) mask[i] = true;
  long flips = 0;
  for (int k = 0; k < 10000; ++k) flips += mutate(Chromosome(22), 0.03, rng, mask).popcount();
  const double n = 10000.0 * 5, mean = n * 0.03, sigma = std::sqrt(n * 0.03 * 0.97);
  if (std::abs(flips - mean) > 3 * sigma) failed.push_back("mutation");

  auto zeros = [](const Chromosome& c) { return static_cast<double>(c.size() - c.popcount()); };
  bool elitist = true;
  int solved = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    GAConfig cfg;
    cfg.seed = seed;
    cfg.measurable_mask = std::vector<bool>(22, true);
    const auto [best, history] = run_ga(cfg, zeros);
    for (std::size_t g = 1; g < history.generations.size(); ++g)
      elitist = elitist && history.generations[g].best.objective <= history.generations[g - 1].best.objective;
    solved += best.objective == 0.0 && history.generation_count() <= 401;
  }
  if (!elitist) failed.push_back("elitism");
  if (solved < 19) failed.push_back("OneMax");

  std::string bad;
  for (const auto& f : failed) bad += " " + f;
  return {failed.empty(), fmt::format("roulette freq {:.4f} (0.75 +/- 0.02), flips {} (mean {:.0f}, 3 sigma {:.1f}), "
                                      "OneMax solved {}/20 (>= 19){}",
                                      freq, flips, mean, 3 * sigma, solved, bad.empty() ? "" : "; failed:" + bad)};
}

Check determinism() {
  const fs::path dir = fs::temp_directory_path() / "thermodiag_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto ref = fixtures::test_cell();
  const auto building = (dir / "door.bld").string();
  const auto meas = (dir / "meas.csv").string();
  io::write_file(building, io::write_building(verify::inject_defect(ref, case_by_id("1"))));
  io::write_file(meas, io::write_measurements(
                           verify::generate_pseudo_measurements(ref, fixtures::weather(), measured_ids(ref))));
  auto run = [&](const std::string& out, const std::string& threads) {
    std::ostringstream o, e;
    return cli::run({"thermodiag", "diagnose", "--building", building, "--weather", fixtures::data("weather_5day.csv"),
                     "--measurements", meas, "--seed", "17", "--threads", threads, "--out", (dir / out).string()},
                    o, e);
  };
  bool pass = run("a", "1") == 0 && run("b", "1") == 0 && run("c", "4") == 0;
  int files = 0;
  for (const char* f : {"report.txt", "report.kv", "scores.csv", "ga_history.csv", "air_temperature.csv"}) {
    const auto a = io::read_file((dir / "a" / f).string());
    pass = pass && a == io::read_file((dir / "b" / f).string()) && a == io::read_file((dir / "c" / f).string());
    ++files;
  }
  fs::remove_all(dir);
  return {pass, fmt::format("{} report files identical across two serial runs and a 4-thread run", files)};
}

Check residual_statistics() {
  const auto a = residual_stats({0.0, 0.0}, {0.2, 0.3});
  const auto b = residual_stats({1, 1, 1, 1}, {2, 3, 5, 8});
  const double err = std::max({std::abs(a.mean - 0.25), std::abs(a.sd - std::sqrt(0.005)), std::abs(b.mean - 3.5),
                               std::abs(b.sd - std::sqrt(7.0))});
  return {err <= 1e-12, fmt::format("mean {} sd {:.16g}; mean {} sd {:.16g}; max error {:.3g} (<= 1e-12)", a.mean,
                                    a.sd, b.mean, b.sd, err)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Check()>>> criteria{
      {"GA best J equals exhaustive best J", oracle_equivalence},
      {"case 1 door conductivity localized", [] { return localization("1", 14); }},
      {"case 3 roof absorptivity localized", [] { return localization("3", 16); }},
      {"case 2 inside convection not localized", no_localization},
      {"forced trajectories equal measurements bitwise", forcing_exactness},
      {"physics sanity", physics_sanity},
      {"self-consistency", self_consistency},
      {"GA unit properties", ga_properties},
      {"determinism", determinism},
      {"residual statistics", residual_statistics},
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Check c;
    try {
      c = criteria[k].second();
    } catch (const std::exception& e) {
      c = {false, std::string("exception: ") + e.what()};
    }
    failures += !c.pass;
    std::cout << fmt::format("{} criterion {:>2}: {}: {}\n", c.pass ? "PASS" : "FAIL", k + 1, criteria[k].first,
                             c.detail)
              << std::flush;
  }
  std::cout << fmt::format("{}/{} criteria passed\n", criteria.size() - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
