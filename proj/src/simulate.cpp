#include "thermodiag/simulate.hpp"

#include "thermodiag/error.hpp"

#include <fmt/format.h>

#include <cmath>

namespace thermodiag {

namespace {

constexpr double kResidualTolerance = 1e-9;
constexpr double kSingularRcond = 1e-13;

Eigen::PartialPivLU<Eigen::MatrixXd> factorize(const Eigen::MatrixXd& M) {
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
  const double rc = lu.rcond();
  if (!(rc > kSingularRcond))
    throw NumericalError(fmt::format("singular step matrix (rcond {:.3g}); a zero-capacity node may be disconnected", rc));
  return lu;
}

void check_residual(const Eigen::MatrixXd& M, const Eigen::VectorXd& T, const Eigen::VectorXd& V) {
  if (!T.allFinite()) throw NumericalError("non-finite temperature in solution");
  const double r = (M * T - V).lpNorm<Eigen::Infinity>();
  const double scale = V.lpNorm<Eigen::Infinity>();
  if (r > kResidualTolerance * std::max(scale, 1e-300))
    throw NumericalError(fmt::format("step residual {:.3g} exceeds tolerance (|V| = {:.3g})", r, scale));
}

void check_forcing(const StateMatrices& sm, const ForcingSet& forcing, const MeasurementSeries& meas) {
  for (NodeId id : forcing) {
    if (id < 1 || id > sm.node_count()) throw ModelError(fmt::format("forced node {} out of range", id));
    if (!meas.has(id)) throw ModelError(fmt::format("forced node {} has no measurement series", id));
  }
}

}  // namespace

Eigen::VectorXd WeatherSeries::inputs(std::size_t n) const {
  const auto& r = records.at(n);
  Eigen::VectorXd u(kChannelCount);
  u << r.ambient, r.sky, r.north, r.south, r.east, r.west, r.horizontal;
  return u;
}

const std::vector<double>& MeasurementSeries::at(NodeId id) const {
  auto it = series.find(id);
  if (it == series.end()) throw ModelError(fmt::format("no measurement series for node {}", id));
  return it->second;
}

std::vector<double> Trajectory::node(NodeId id) const {
  if (id < 1 || id > temperatures.rows()) throw ModelError(fmt::format("node {} out of range", id));
  std::vector<double> out(temperatures.cols());
  for (Eigen::Index n = 0; n < temperatures.cols(); ++n) out[n] = temperatures(id - 1, n);
  return out;
}

StepSystem build_step_system(const StateMatrices& sm, double dt, const Eigen::VectorXd& previous,
                             const Eigen::VectorXd& inputs_next) {
  if (!(dt > 0.0)) throw ModelError("time step must be > 0");
  const Eigen::VectorXd c_dt = sm.capacity / dt;
  StepSystem sys;
  sys.M = -sm.A;
  sys.M.diagonal() += c_dt;
  sys.V = c_dt.cwiseProduct(previous) + sm.B * inputs_next;
  return sys;
}

void apply_forcing(StepSystem& system, NodeId node, double value) {
  const Eigen::Index i = node - 1;
  system.M.row(i).setZero();
  system.M(i, i) = 1.0;
  system.V(i) = value;
}

Eigen::VectorXd step(const StateMatrices& sm, double dt, const Eigen::VectorXd& previous,
                     const Eigen::VectorXd& inputs_next, const ForcingSet& forcing,
                     const std::map<NodeId, double>& forced_values) {
  StepSystem sys = build_step_system(sm, dt, previous, inputs_next);
  for (NodeId id : forcing) {
    auto it = forced_values.find(id);
    if (it == forced_values.end()) throw ModelError(fmt::format("missing measurement for forced node {}", id));
    if (id < 1 || id > sm.node_count()) throw ModelError(fmt::format("forced node {} out of range", id));
    apply_forcing(sys, id, it->second);
  }
  const auto lu = factorize(sys.M);
  Eigen::VectorXd T = lu.solve(sys.V);
  for (NodeId id : forcing) T(id - 1) = forced_values.at(id);
  check_residual(sys.M, T, sys.V);
  return T;
}

Eigen::VectorXd initial_state(const StateMatrices& sm, const Eigen::VectorXd& inputs0) {
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(sm.A);
  if (lu.isInvertible()) {
    Eigen::VectorXd T = lu.solve(-sm.B * inputs0);
    if (T.allFinite()) return T;
  }
  return Eigen::VectorXd::Constant(sm.node_count(), inputs0(kAmbient));
}

Eigen::VectorXd initial_state(const StateMatrices& sm, const Eigen::VectorXd& inputs0, const ForcingSet& forcing,
                              const MeasurementSeries& meas) {
  if (forcing.empty()) return initial_state(sm, inputs0);
  check_forcing(sm, forcing, meas);
  Eigen::MatrixXd M = -sm.A;
  Eigen::VectorXd V = sm.B * inputs0;
  for (NodeId id : forcing) {
    M.row(id - 1).setZero();
    M(id - 1, id - 1) = 1.0;
    V(id - 1) = meas.at(id).at(0);
  }
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
  Eigen::VectorXd T;
  if (lu.isInvertible()) T = lu.solve(V);
  if (T.size() == 0 || !T.allFinite()) T = Eigen::VectorXd::Constant(sm.node_count(), inputs0(kAmbient));
  for (NodeId id : forcing) T(id - 1) = meas.at(id).at(0);
  return T;
}

Trajectory simulate(const StateMatrices& sm, const WeatherSeries& weather, const ForcingSet& forcing,
                    const MeasurementSeries& meas, const Eigen::VectorXd& initial) {
  const int n_nodes = sm.node_count();
  const std::size_t steps = weather.size();
  if (steps < 1) throw ModelError("weather series is empty");
  if (initial.size() != n_nodes) throw ModelError("initial state size does not match the model");
  if (!forcing.empty()) {
    check_forcing(sm, forcing, meas);
    if (meas.length() != steps)
      throw ModelError(fmt::format("measurement length {} does not match weather length {}", meas.length(), steps));
    if (meas.dt != weather.dt)
      throw ModelError(fmt::format("measurement dt {} does not match weather dt {}", meas.dt, weather.dt));
  }

  const double dt = weather.dt;
  Eigen::MatrixXd M = -sm.A;
  M.diagonal() += sm.capacity / dt;
  for (NodeId id : forcing) {
    M.row(id - 1).setZero();
    M(id - 1, id - 1) = 1.0;
  }
  // The forced rows do not change over time, so one factorization serves
  // every step.
  const auto lu = factorize(M);
  const Eigen::VectorXd c_dt = sm.capacity / dt;

  Trajectory traj;
  traj.dt = dt;
  traj.temperatures.resize(n_nodes, static_cast<Eigen::Index>(steps));
  std::vector<std::pair<Eigen::Index, const std::vector<double>*>> forced;
  for (NodeId id : forcing) forced.emplace_back(id - 1, &meas.at(id));

  Eigen::VectorXd T = initial;
  for (const auto& [i, s] : forced) T(i) = (*s)[0];
  traj.temperatures.col(0) = T;

  for (std::size_t n = 1; n < steps; ++n) {
    Eigen::VectorXd V = c_dt.cwiseProduct(T) + sm.B * weather.inputs(n);
    for (const auto& [i, s] : forced) V(i) = (*s)[n];
    Eigen::VectorXd next = lu.solve(V);
    for (const auto& [i, s] : forced) next(i) = V(i);
    check_residual(M, next, V);
    T = std::move(next);
    traj.temperatures.col(static_cast<Eigen::Index>(n)) = T;
  }
  return traj;
}

}  // namespace thermodiag
