#pragma once

// Single-zone nodal building model: declarative description, RC mesh and
// state-space assembly C dT/dt = A T + B U.

#include <Eigen/Dense>

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace thermodiag {

/// 1-based node number, dense over 1..node_count.
using NodeId = int;

enum class Orientation { North, South, East, West, HorizontalUp, HorizontalDown };
enum class OutsideBoundary { Ambient, NullFlux };
enum class NodeRole { OutsideSurface, Internal, InsideSurface, MeanRadiant, Air };

struct Layer {
  double thickness = 0.0;      // m
  double conductivity = 0.0;   // W/(m.K)
  double density = 0.0;        // kg/m3
  double specific_heat = 0.0;  // J/(kg.K)

  bool operator==(const Layer&) const = default;
};

struct EnvelopeComponent {
  std::string name;
  Orientation orientation = Orientation::North;
  double area = 0.0;  // m2
  std::vector<Layer> layers;  // outside -> inside
  int internal_node_count = 0;
  double h_ci = 0.0;  // inside convective, W/(m2.K)
  double h_ce = 0.0;  // outside convective
  double h_ri = 0.0;  // inside linearized radiative
  double h_re = 0.0;  // outside linearized radiative (to sky)
  double absorptivity = 0.0;
  OutsideBoundary outside_boundary = OutsideBoundary::Ambient;
  bool window = false;

  bool operator==(const EnvelopeComponent&) const = default;
};

struct AirZone {
  double capacity = 0.0;             // C_ai, J/K
  double air_specific_heat = 1006.0; // c, J/(kg.K)
  double ventilation_rate = 0.0;     // Q, kg/s

  bool operator==(const AirZone&) const = default;
};

struct BuildingDescription {
  std::vector<EnvelopeComponent> components;
  AirZone zone;
  double glazing_transmitted_fraction = 0.0;

  bool operator==(const BuildingDescription&) const = default;

  const EnvelopeComponent* find(const std::string& name) const;
  EnvelopeComponent* find(const std::string& name);
};

/// Throws ModelError naming the offending component and field.
void validate(const BuildingDescription& desc);

struct NodeInfo {
  NodeId id = 0;
  NodeRole role = NodeRole::Internal;
  int component = -1;  // index into BuildingDescription::components, -1 for zone nodes
};

/// Input channels of U(t), in order.
enum Channel : int { kAmbient = 0, kSky, kSolarNorth, kSolarSouth, kSolarEast, kSolarWest, kSolarHorizontal, kChannelCount };

const std::vector<std::string>& channel_labels();

/// Weather channel carrying the incident flux for an orientation; -1 when the
/// orientation receives none (downward-facing surfaces).
int solar_channel(Orientation o);

struct NodalModel {
  std::vector<NodeInfo> nodes;  // nodes[k].id == k + 1
  std::vector<double> capacities;
  std::map<std::pair<NodeId, NodeId>, double> conductances;  // both (i,j) and (j,i) stored
  std::map<NodeId, std::vector<std::pair<int, double>>> input_couplings;

  int node_count() const { return static_cast<int>(nodes.size()); }
  NodeId air_node() const;
  NodeId mean_radiant_node() const;

  /// Nodes of one component, outside -> inside.
  std::vector<NodeId> component_nodes(int component) const;
  NodeId inside_surface(int component) const;
  NodeId outside_surface(int component) const;  // 0 when the component has none

  /// Resolves "air", "mean_radiant", a plain integer id, or
  /// "<component>:inside|outside|internal<k>" (k counts from the outside, 1-based).
  NodeId resolve(const BuildingDescription& desc, const std::string& selector) const;
  std::string describe(const BuildingDescription& desc, NodeId id) const;
};

struct StateMatrices {
  Eigen::VectorXd capacity;  // diagonal of C
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  std::vector<std::string> input_channels;

  int node_count() const { return static_cast<int>(capacity.size()); }
};

struct LadderRC {
  std::vector<double> conductances;  // W/K, size internal_node_count + 1
  std::vector<double> capacities;    // J/K, size internal_node_count + 2
};

/// Splits a layer stack into internal_node_count + 1 segments of equal thermal
/// resistance and lumps each segment's capacity half onto each end node.
LadderRC layer_stack_to_rc(const std::vector<Layer>& layers, double area, int internal_node_count);

NodalModel build_mesh(const BuildingDescription& desc);
StateMatrices assemble(const NodalModel& model, const BuildingDescription& desc);

std::string to_string(Orientation o);
std::string to_string(NodeRole r);

}  // namespace thermodiag
