#pragma once

// Backward-Euler time stepping of C dT/dt = A T + B U with Dirichlet forcing
// of selected nodes.

#include "thermodiag/model.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <set>
#include <vector>

namespace thermodiag {

struct WeatherRecord {
  double ambient = 0.0;  // T_ae, degC
  double sky = 0.0;      // T_sky, degC
  double north = 0.0, south = 0.0, east = 0.0, west = 0.0, horizontal = 0.0;  // W/m2
};

struct WeatherSeries {
  double dt = 900.0;          // s
  std::int64_t start = 0;     // epoch seconds of the first record
  std::vector<WeatherRecord> records;

  std::size_t size() const { return records.size(); }
  /// Input vector U for record n, ordered as channel_labels().
  Eigen::VectorXd inputs(std::size_t n) const;
};

/// The measurement (.mes) file: one series per measured node.
struct MeasurementSeries {
  double dt = 900.0;
  std::int64_t start = 0;
  std::map<NodeId, std::vector<double>> series;

  std::size_t length() const { return series.empty() ? 0 : series.begin()->second.size(); }
  bool has(NodeId id) const { return series.count(id) != 0; }
  const std::vector<double>& at(NodeId id) const;
};

using ForcingSet = std::set<NodeId>;

struct Trajectory {
  double dt = 900.0;
  Eigen::MatrixXd temperatures;  // node_count x steps, row k is node k+1

  std::vector<double> node(NodeId id) const;
  int steps() const { return static_cast<int>(temperatures.cols()); }
};

struct StepSystem {
  Eigen::MatrixXd M;
  Eigen::VectorXd V;
};

/// M = C/dt - A, V = (C/dt) T_prev + B U_next.
StepSystem build_step_system(const StateMatrices& sm, double dt, const Eigen::VectorXd& previous,
                             const Eigen::VectorXd& inputs_next);

/// Replaces row `node` by the unit row and sets V[node] = value.
void apply_forcing(StepSystem& system, NodeId node, double value);

/// One implicit step. `forced_values` holds the measurement of every forced
/// node at the new time level.
Eigen::VectorXd step(const StateMatrices& sm, double dt, const Eigen::VectorXd& previous,
                     const Eigen::VectorXd& inputs_next, const ForcingSet& forcing,
                     const std::map<NodeId, double>& forced_values);

/// Steady state A T = -B U0. Falls back to a uniform field at U0's ambient
/// temperature when A is singular.
Eigen::VectorXd initial_state(const StateMatrices& sm, const Eigen::VectorXd& inputs0);

/// Steady state with the forced nodes held at their first measurement.
Eigen::VectorXd initial_state(const StateMatrices& sm, const Eigen::VectorXd& inputs0, const ForcingSet& forcing,
                              const MeasurementSeries& meas);

/// Runs the whole horizon. Column 0 is `initial` (with forced nodes set to
/// their first measurement); column n solves the step towards record n.
Trajectory simulate(const StateMatrices& sm, const WeatherSeries& weather, const ForcingSet& forcing,
                    const MeasurementSeries& meas, const Eigen::VectorXd& initial);

}  // namespace thermodiag
