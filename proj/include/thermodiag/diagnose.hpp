#pragma once

// Localizing defective sub-models: which nodes, once forced to their
// measurements, best restore agreement on the indoor air temperature.

#include "thermodiag/ga.hpp"
#include "thermodiag/model.hpp"
#include "thermodiag/simulate.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace thermodiag {

/// Sum of squared residuals J = sum (measured - simulated)^2.
double objective(const std::vector<double>& simulated, const std::vector<double>& measured);

struct ResidualStats {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation (N - 1)
};

/// Statistics of measured - simulated.
ResidualStats residual_stats(const std::vector<double>& simulated, const std::vector<double>& measured);

/// Everything needed to score a forcing set. Holds its inputs by value.
class DiagnosisProblem {
 public:
  DiagnosisProblem(BuildingDescription desc, WeatherSeries weather, MeasurementSeries meas, int skip_steps = 0);

  const BuildingDescription& description() const { return desc_; }
  const NodalModel& mesh() const { return mesh_; }
  const StateMatrices& matrices() const { return sm_; }
  const WeatherSeries& weather() const { return weather_; }
  const MeasurementSeries& measurements() const { return meas_; }
  NodeId air_node() const { return air_; }
  int skip_steps() const { return skip_; }
  /// Chromosome length: every node but the air node.
  std::size_t chromosome_length() const { return static_cast<std::size_t>(mesh_.node_count() - 1); }
  /// Measured nodes other than the air node, ascending.
  std::vector<NodeId> measurable_nodes() const;
  std::vector<bool> measurable_mask() const;

  Trajectory run(const ForcingSet& forcing) const;
  /// Simulated and measured air temperature after the skipped warm-up.
  std::pair<std::vector<double>, std::vector<double>> air_series(const ForcingSet& forcing) const;
  double evaluate(const ForcingSet& forcing) const;
  double evaluate(const ga::Chromosome& chromosome) const;

 private:
  BuildingDescription desc_;
  NodalModel mesh_;
  StateMatrices sm_;
  WeatherSeries weather_;
  MeasurementSeries meas_;
  NodeId air_ = 0;
  int skip_ = 0;
};

using SetEvaluator = std::function<double(const ForcingSet&)>;

struct ExhaustiveResult {
  ForcingSet best;
  double best_objective = 0.0;
  std::vector<std::pair<ForcingSet, double>> table;  // subset index order (bit k = k-th measurable node)
};

constexpr std::size_t kMaxExhaustiveNodes = 20;

/// Scores all 2^k subsets. Ties go to fewer forced nodes, then to the lower
/// bit pattern in node order.
ExhaustiveResult exhaustive_search(const std::vector<NodeId>& measurable, const SetEvaluator& evaluate,
                                   int threads = 1);

struct NodeScores {
  double unforced = 0.0;
  std::map<NodeId, double> single;
};

NodeScores per_node_scores(const std::vector<NodeId>& measurable, const SetEvaluator& evaluate, int threads = 1);

struct DiagnosisReport {
  ForcingSet best;
  double best_objective = 0.0;
  double unforced_objective = 0.0;
  NodeScores scores;
  ResidualStats before;
  ResidualStats after;
  ga::GAHistory history;
  std::optional<ExhaustiveResult> exhaustive;
};

DiagnosisReport diagnose(const DiagnosisProblem& problem, const ga::GAConfig& config, bool run_exhaustive);

/// Key-value text, one "key = value" per line, fixed key order.
std::string format_report_kv(const DiagnosisReport& report, const DiagnosisProblem& problem);
/// Aligned plain-text tables for people.
std::string format_report_table(const DiagnosisReport& report, const DiagnosisProblem& problem);
/// generation,best_J,best_fitness,mean_fitness,best_chromosome
std::string format_history_csv(const ga::GAHistory& history);
/// step,measured,simulated_unforced,simulated_best
std::string format_air_csv(const DiagnosisReport& report, const DiagnosisProblem& problem);

std::string format_forcing_set(const ForcingSet& s);

}  // namespace thermodiag
