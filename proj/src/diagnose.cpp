#include "thermodiag/diagnose.hpp"

#include "parallel.hpp"
#include "thermodiag/error.hpp"

#include <fmt/format.h>

#include <cmath>
#include <stdexcept>

namespace thermodiag {

double objective(const std::vector<double>& simulated, const std::vector<double>& measured) {
  if (simulated.size() != measured.size())
    throw std::invalid_argument(
        fmt::format("objective: series lengths differ ({} vs {})", simulated.size(), measured.size()));
  if (simulated.empty()) throw std::invalid_argument("objective: empty series");
  double j = 0.0;
  for (std::size_t i = 0; i < simulated.size(); ++i) {
    const double r = measured[i] - simulated[i];
    j += r * r;
  }
  return j;
}

ResidualStats residual_stats(const std::vector<double>& simulated, const std::vector<double>& measured) {
  if (simulated.size() != measured.size())
    throw std::invalid_argument(
        fmt::format("residual_stats: series lengths differ ({} vs {})", simulated.size(), measured.size()));
  const std::size_t n = simulated.size();
  if (n < 2) throw std::invalid_argument("residual_stats: need at least 2 samples");
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += measured[i] - simulated[i];
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = measured[i] - simulated[i] - mean;
    ss += d * d;
  }
  return {mean, std::sqrt(ss / static_cast<double>(n - 1))};
}

DiagnosisProblem::DiagnosisProblem(BuildingDescription desc, WeatherSeries weather, MeasurementSeries meas,
                                   int skip_steps)
    : desc_(std::move(desc)), weather_(std::move(weather)), meas_(std::move(meas)), skip_(skip_steps) {
  mesh_ = build_mesh(desc_);
  sm_ = assemble(mesh_, desc_);
  air_ = mesh_.air_node();
  if (!meas_.has(air_))
    throw ModelError(fmt::format("measurements have no series for the air node (column node_{})", air_));
  if (meas_.length() != weather_.size())
    throw ModelError(
        fmt::format("measurement length {} does not match weather length {}", meas_.length(), weather_.size()));
  if (meas_.dt != weather_.dt)
    throw ModelError(fmt::format("measurement dt {} does not match weather dt {}", meas_.dt, weather_.dt));
  for (const auto& [id, s] : meas_.series)
    if (id < 1 || id > mesh_.node_count())
      throw ModelError(fmt::format("measured node {} does not exist (model has {} nodes)", id, mesh_.node_count()));
  if (skip_ < 0 || static_cast<std::size_t>(skip_) >= weather_.size())
    throw ModelError(fmt::format("skip-steps {} leaves no samples (series length {})", skip_, weather_.size()));
}

std::vector<NodeId> DiagnosisProblem::measurable_nodes() const {
  std::vector<NodeId> ids;
  for (const auto& [id, s] : meas_.series)
    if (id != air_) ids.push_back(id);
  return ids;
}

std::vector<bool> DiagnosisProblem::measurable_mask() const {
  std::vector<bool> mask(chromosome_length(), false);
  for (NodeId id : measurable_nodes())
    if (static_cast<std::size_t>(id) <= mask.size()) mask[id - 1] = true;
  return mask;
}

Trajectory DiagnosisProblem::run(const ForcingSet& forcing) const {
  if (forcing.count(air_)) throw ModelError("the air node cannot be forced");
  const Eigen::VectorXd t0 = initial_state(sm_, weather_.inputs(0), forcing, meas_);
  return simulate(sm_, weather_, forcing, meas_, t0);
}

std::pair<std::vector<double>, std::vector<double>> DiagnosisProblem::air_series(const ForcingSet& forcing) const {
  const Trajectory traj = run(forcing);
  const auto& measured = meas_.at(air_);
  std::vector<double> sim, mes;
  for (std::size_t n = static_cast<std::size_t>(skip_); n < measured.size(); ++n) {
    sim.push_back(traj.temperatures(air_ - 1, static_cast<Eigen::Index>(n)));
    mes.push_back(measured[n]);
  }
  return {std::move(sim), std::move(mes)};
}

double DiagnosisProblem::evaluate(const ForcingSet& forcing) const {
  const auto [sim, mes] = air_series(forcing);
  return objective(sim, mes);
}

double DiagnosisProblem::evaluate(const ga::Chromosome& chromosome) const {
  if (chromosome.size() != chromosome_length())
    throw ModelError(fmt::format("chromosome length {} != {}", chromosome.size(), chromosome_length()));
  return evaluate(ga::decode(chromosome));
}

ExhaustiveResult exhaustive_search(const std::vector<NodeId>& measurable, const SetEvaluator& evaluate, int threads) {
  if (measurable.size() > kMaxExhaustiveNodes)
    throw ModelError(fmt::format("exhaustive search over {} nodes exceeds the limit of {}", measurable.size(),
                                 kMaxExhaustiveNodes));
  NodeId max_id = 0;
  for (NodeId id : measurable) max_id = std::max(max_id, id);
  const std::size_t count = std::size_t{1} << measurable.size();

  ExhaustiveResult out;
  out.table.resize(count);
  for (std::size_t mask = 0; mask < count; ++mask)
    for (std::size_t k = 0; k < measurable.size(); ++k)
      if (mask & (std::size_t{1} << k)) out.table[mask].first.insert(measurable[k]);
  detail::parallel_for(count, threads, [&](std::size_t k) { out.table[k].second = evaluate(out.table[k].first); });

  const auto length = static_cast<std::size_t>(max_id);
  std::size_t best = 0;
  for (std::size_t k = 1; k < count; ++k) {
    if (ga::better(out.table[k].second, ga::encode(out.table[k].first, length), out.table[best].second,
                   ga::encode(out.table[best].first, length)))
      best = k;
  }
  out.best = out.table[best].first;
  out.best_objective = out.table[best].second;
  return out;
}

NodeScores per_node_scores(const std::vector<NodeId>& measurable, const SetEvaluator& evaluate, int threads) {
  std::vector<double> j(measurable.size() + 1);
  detail::parallel_for(j.size(), threads, [&](std::size_t k) {
    j[k] = k == 0 ? evaluate(ForcingSet{}) : evaluate(ForcingSet{measurable[k - 1]});
  });
  NodeScores s;
  s.unforced = j[0];
  for (std::size_t k = 0; k < measurable.size(); ++k) s.single[measurable[k]] = j[k + 1];
  return s;
}

DiagnosisReport diagnose(const DiagnosisProblem& problem, const ga::GAConfig& config, bool run_exhaustive) {
  ga::GAConfig cfg = config;
  if (cfg.measurable_mask.empty()) cfg.measurable_mask = problem.measurable_mask();
  if (cfg.measurable_mask.size() != problem.chromosome_length())
    throw ModelError("measurable mask length does not match the model");

  DiagnosisReport report;
  auto [best, history] = ga::run_ga(cfg, [&](const ga::Chromosome& c) { return problem.evaluate(c); });
  report.best = ga::decode(best.chromosome);
  report.best_objective = best.objective;
  report.history = std::move(history);

  const auto measurable = problem.measurable_nodes();
  const SetEvaluator eval = [&](const ForcingSet& s) { return problem.evaluate(s); };
  report.scores = per_node_scores(measurable, eval, cfg.threads);
  report.unforced_objective = report.scores.unforced;

  if (run_exhaustive) report.exhaustive = exhaustive_search(measurable, eval, cfg.threads);

  const auto before = problem.air_series({});
  const auto after = problem.air_series(report.best);
  if (before.first.size() >= 2) {
    report.before = residual_stats(before.first, before.second);
    report.after = residual_stats(after.first, after.second);
  }
  return report;
}

std::string format_forcing_set(const ForcingSet& s) {
  if (s.empty()) return "none";
  std::string out;
  for (NodeId id : s) out += (out.empty() ? "" : " ") + std::to_string(id);
  return out;
}

std::string format_report_kv(const DiagnosisReport& r, const DiagnosisProblem& p) {
  std::string out;
  auto kv = [&](const std::string& k, const std::string& v) { out += k + " = " + v + "\n"; };
  kv("nodes", std::to_string(p.mesh().node_count()));
  kv("air_node", std::to_string(p.air_node()));
  kv("samples", std::to_string(p.weather().size() - static_cast<std::size_t>(p.skip_steps())));
  kv("skip_steps", std::to_string(p.skip_steps()));
  {
    const auto nodes = p.measurable_nodes();
    const ForcingSet m(nodes.begin(), nodes.end());
    kv("measurable_nodes", format_forcing_set(m));
  }
  kv("best_forcing_set", format_forcing_set(r.best));
  {
    std::string names;
    for (NodeId id : r.best) names += (names.empty() ? "" : " ") + p.mesh().describe(p.description(), id);
    kv("best_forcing_names", names.empty() ? "none" : names);
  }
  kv("best_J", fmt::format("{}", r.best_objective));
  kv("unforced_J", fmt::format("{}", r.unforced_objective));
  kv("best_fitness", fmt::format("{}", ga::fitness(r.best_objective)));
  kv("score.none", fmt::format("{}", r.scores.unforced));
  for (const auto& [id, j] : r.scores.single) kv(fmt::format("score.node_{}", id), fmt::format("{}", j));
  kv("residual_before.mean", fmt::format("{}", r.before.mean));
  kv("residual_before.sd", fmt::format("{}", r.before.sd));
  kv("residual_after.mean", fmt::format("{}", r.after.mean));
  kv("residual_after.sd", fmt::format("{}", r.after.sd));
  kv("ga.generations", std::to_string(r.history.generation_count() - 1));
  kv("ga.evaluations", std::to_string(r.history.evaluations));
  kv("ga.stagnated", r.history.stagnated ? "true" : "false");
  if (r.exhaustive) {
    kv("exhaustive.best_forcing_set", format_forcing_set(r.exhaustive->best));
    kv("exhaustive.best_J", fmt::format("{}", r.exhaustive->best_objective));
    kv("exhaustive.subsets", std::to_string(r.exhaustive->table.size()));
    kv("exhaustive.agrees", r.exhaustive->best_objective == r.best_objective ? "true" : "false");
  }
  return out;
}

std::string format_report_table(const DiagnosisReport& r, const DiagnosisProblem& p) {
  std::string out;
  out += fmt::format("Best forcing set : {}\n", format_forcing_set(r.best));
  for (NodeId id : r.best) out += fmt::format("  node {:>3}  {}\n", id, p.mesh().describe(p.description(), id));
  out += fmt::format("J forced         : {:.4f} degC^2\n", r.best_objective);
  out += fmt::format("J without forcing: {:.4f} degC^2\n", r.unforced_objective);
  out += fmt::format("GA generations   : {} ({} distinct evaluations{})\n\n", r.history.generation_count() - 1,
                     r.history.evaluations, r.history.stagnated ? ", stopped on stagnation" : "");

  out += "Single-node scores\n";
  out += fmt::format("  {:<18} {:<24} {:>14}\n", "node", "location", "J (degC^2)");
  for (const auto& [id, j] : r.scores.single)
    out += fmt::format("  {:<18} {:<24} {:>14.4f}\n", id, p.mesh().describe(p.description(), id), j);
  out += fmt::format("  {:<18} {:<24} {:>14.4f}\n\n", "without forcing", "", r.scores.unforced);

  out += "Air temperature residuals (measured - simulated)\n";
  out += fmt::format("  {:<6} {:>16} {:>16}\n", "", "before forcing", "after forcing");
  out += fmt::format("  {:<6} {:>13.3f} degC {:>13.3f} degC\n", "mean", r.before.mean, r.after.mean);
  out += fmt::format("  {:<6} {:>13.3f} degC {:>13.3f} degC\n", "sd", r.before.sd, r.after.sd);

  if (r.exhaustive) {
    out += fmt::format("\nExhaustive search over {} subsets: best {} with J = {:.4f} degC^2 ({})\n",
                       r.exhaustive->table.size(), format_forcing_set(r.exhaustive->best),
                       r.exhaustive->best_objective,
                       r.exhaustive->best_objective == r.best_objective ? "agrees with GA" : "differs from GA");
  }
  return out;
}

std::string format_history_csv(const ga::GAHistory& history) {
  std::string out = "generation,best_J,best_fitness,mean_fitness,best_chromosome\n";
  for (const auto& g : history.generations)
    out += fmt::format("{},{},{},{},{}\n", g.generation, g.best.objective, g.best_fitness, g.mean_fitness,
                       g.best.chromosome.to_string());
  return out;
}

std::string format_air_csv(const DiagnosisReport& report, const DiagnosisProblem& p) {
  const Trajectory unforced = p.run({});
  const Trajectory forced = p.run(report.best);
  const auto& measured = p.measurements().at(p.air_node());
  std::string out = "step,time_s,measured,simulated_unforced,simulated_best\n";
  const Eigen::Index row = p.air_node() - 1;
  for (std::size_t n = 0; n < measured.size(); ++n) {
    const auto c = static_cast<Eigen::Index>(n);
    out += fmt::format("{},{},{},{},{}\n", n, static_cast<double>(n) * p.weather().dt, measured[n],
                       unforced.temperatures(row, c), forced.temperatures(row, c));
  }
  return out;
}

}  // namespace thermodiag
