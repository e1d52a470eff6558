#include "thermodiag/model.hpp"

#include "thermodiag/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <set>

namespace thermodiag {

namespace {

void require_positive(double v, const std::string& where, const char* field) {
  if (!(v > 0.0)) throw ModelError(fmt::format("{}: {} must be > 0 (got {})", where, field, v));
}

void require_non_negative(double v, const std::string& where, const char* field) {
  if (!(v >= 0.0)) throw ModelError(fmt::format("{}: {} must be >= 0 (got {})", where, field, v));
}

void add_conductance(NodalModel& m, NodeId i, NodeId j, double g) {
  if (g == 0.0) return;
  m.conductances[{i, j}] += g;
  m.conductances[{j, i}] += g;
}

void add_input(NodalModel& m, NodeId i, int channel, double coefficient) {
  if (coefficient == 0.0) return;
  auto& list = m.input_couplings[i];
  auto it = std::find_if(list.begin(), list.end(), [&](const auto& p) { return p.first == channel; });
  if (it == list.end())
    list.emplace_back(channel, coefficient);
  else
    it->second += coefficient;
}

}  // namespace

const EnvelopeComponent* BuildingDescription::find(const std::string& name) const {
  for (const auto& c : components)
    if (c.name == name) return &c;
  return nullptr;
}

EnvelopeComponent* BuildingDescription::find(const std::string& name) {
  for (auto& c : components)
    if (c.name == name) return &c;
  return nullptr;
}

void validate(const BuildingDescription& desc) {
  if (desc.components.empty()) throw ModelError("building has no envelope components");
  std::set<std::string> names;
  int null_flux = 0;
  for (const auto& c : desc.components) {
    const std::string where = "component '" + c.name + "'";
    if (c.name.empty()) throw ModelError("component with empty name");
    if (!names.insert(c.name).second) throw ModelError(fmt::format("duplicate component name '{}'", c.name));
    require_positive(c.area, where, "area");
    if (c.layers.empty()) throw ModelError(where + ": no layers");
    for (std::size_t k = 0; k < c.layers.size(); ++k) {
      const auto lw = fmt::format("{} layer {}", where, k + 1);
      require_positive(c.layers[k].thickness, lw, "thickness");
      require_positive(c.layers[k].conductivity, lw, "conductivity");
      require_positive(c.layers[k].density, lw, "density");
      require_positive(c.layers[k].specific_heat, lw, "specific_heat");
    }
    if (c.internal_node_count < 0) throw ModelError(where + ": internal_nodes must be >= 0");
    require_non_negative(c.h_ci, where, "h_ci");
    require_non_negative(c.h_ce, where, "h_ce");
    require_non_negative(c.h_ri, where, "h_ri");
    require_non_negative(c.h_re, where, "h_re");
    if (!(c.absorptivity >= 0.0 && c.absorptivity <= 1.0))
      throw ModelError(fmt::format("{}: absorptivity must be in [0,1] (got {})", where, c.absorptivity));
    if (c.outside_boundary == OutsideBoundary::NullFlux) {
      ++null_flux;
      if (c.orientation != Orientation::HorizontalDown)
        throw ModelError(where + ": null-flux boundary is only allowed on a floor (horizontal-down) component");
      if (c.internal_node_count < 1)
        throw ModelError(where + ": null-flux component needs at least one internal node (the deep node)");
      if (c.window) throw ModelError(where + ": a window cannot have a null-flux boundary");
    }
  }
  if (null_flux > 1) throw ModelError("at most one component may have a null-flux boundary");
  require_positive(desc.zone.capacity, "zone", "capacity");
  require_positive(desc.zone.air_specific_heat, "zone", "air_specific_heat");
  require_non_negative(desc.zone.ventilation_rate, "zone", "ventilation_rate");
  if (!(desc.glazing_transmitted_fraction >= 0.0 && desc.glazing_transmitted_fraction <= 1.0))
    throw ModelError(fmt::format("zone: glazing_transmitted_fraction must be in [0,1] (got {})",
                                 desc.glazing_transmitted_fraction));
}

const std::vector<std::string>& channel_labels() {
  static const std::vector<std::string> labels{"T_ae", "T_sky", "I_N", "I_S", "I_E", "I_W", "I_H"};
  return labels;
}

int solar_channel(Orientation o) {
  switch (o) {
    case Orientation::North: return kSolarNorth;
    case Orientation::South: return kSolarSouth;
    case Orientation::East: return kSolarEast;
    case Orientation::West: return kSolarWest;
    case Orientation::HorizontalUp: return kSolarHorizontal;
    case Orientation::HorizontalDown: return -1;
  }
  return -1;
}

std::string to_string(Orientation o) {
  switch (o) {
    case Orientation::North: return "N";
    case Orientation::South: return "S";
    case Orientation::East: return "E";
    case Orientation::West: return "W";
    case Orientation::HorizontalUp: return "horizontal-up";
    case Orientation::HorizontalDown: return "horizontal-down";
  }
  return "?";
}

std::string to_string(NodeRole r) {
  switch (r) {
    case NodeRole::OutsideSurface: return "outside-surface";
    case NodeRole::Internal: return "internal";
    case NodeRole::InsideSurface: return "inside-surface";
    case NodeRole::MeanRadiant: return "mean-radiant";
    case NodeRole::Air: return "air";
  }
  return "?";
}

LadderRC layer_stack_to_rc(const std::vector<Layer>& layers, double area, int internal_node_count) {
  if (layers.empty()) throw ModelError("layer stack is empty");
  if (!(area > 0.0)) throw ModelError("layer stack area must be > 0");
  if (internal_node_count < 0) throw ModelError("internal node count must be >= 0");

  // Resistance coordinate of each layer boundary and the capacity per unit
  // resistance inside each layer.
  std::vector<double> bound{0.0};
  std::vector<double> density;
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const auto& l = layers[k];
    if (!(l.thickness > 0.0 && l.conductivity > 0.0 && l.density > 0.0 && l.specific_heat > 0.0))
      throw ModelError(fmt::format("layer {}: all fields must be > 0", k + 1));
    const double r = l.thickness / (l.conductivity * area);
    const double c = l.thickness * area * l.density * l.specific_heat;
    bound.push_back(bound.back() + r);
    density.push_back(c / r);
  }
  const double total_r = bound.back();
  const int segments = internal_node_count + 1;

  auto capacity_between = [&](double lo, double hi) {
    double c = 0.0;
    for (std::size_t k = 0; k < density.size(); ++k) {
      const double a = std::max(lo, bound[k]);
      const double b = std::min(hi, bound[k + 1]);
      if (b > a) c += (b - a) * density[k];
    }
    return c;
  };

  LadderRC out;
  out.conductances.assign(segments, static_cast<double>(segments) / total_r);
  out.capacities.assign(segments + 1, 0.0);
  for (int s = 0; s < segments; ++s) {
    // The last edge uses total_r itself so no capacity is lost to rounding.
    const double lo = total_r * s / segments;
    const double hi = s + 1 == segments ? total_r : total_r * (s + 1) / segments;
    const double c = capacity_between(lo, hi);
    out.capacities[s] += 0.5 * c;
    out.capacities[s + 1] += 0.5 * c;
  }
  return out;
}

NodeId NodalModel::air_node() const {
  for (const auto& n : nodes)
    if (n.role == NodeRole::Air) return n.id;
  throw ModelError("model has no air node");
}

NodeId NodalModel::mean_radiant_node() const {
  for (const auto& n : nodes)
    if (n.role == NodeRole::MeanRadiant) return n.id;
  throw ModelError("model has no mean-radiant node");
}

std::vector<NodeId> NodalModel::component_nodes(int component) const {
  std::vector<NodeId> ids;
  for (const auto& n : nodes)
    if (n.component == component) ids.push_back(n.id);
  return ids;
}

NodeId NodalModel::inside_surface(int component) const {
  for (const auto& n : nodes)
    if (n.component == component && n.role == NodeRole::InsideSurface) return n.id;
  throw ModelError(fmt::format("component {} has no inside-surface node", component));
}

NodeId NodalModel::outside_surface(int component) const {
  for (const auto& n : nodes)
    if (n.component == component && n.role == NodeRole::OutsideSurface) return n.id;
  return 0;
}

NodeId NodalModel::resolve(const BuildingDescription& desc, const std::string& selector) const {
  if (selector == "air") return air_node();
  if (selector == "mean_radiant") return mean_radiant_node();
  int id = 0;
  auto [ptr, ec] = std::from_chars(selector.data(), selector.data() + selector.size(), id);
  if (ec == std::errc() && ptr == selector.data() + selector.size()) {
    if (id < 1 || id > node_count()) throw ModelError(fmt::format("node {} out of range 1..{}", id, node_count()));
    return id;
  }
  const auto colon = selector.find(':');
  if (colon == std::string::npos) throw ModelError("bad node selector '" + selector + "'");
  const std::string name = selector.substr(0, colon);
  const std::string part = selector.substr(colon + 1);
  int comp = -1;
  for (std::size_t k = 0; k < desc.components.size(); ++k)
    if (desc.components[k].name == name) comp = static_cast<int>(k);
  if (comp < 0) throw ModelError("unknown component '" + name + "' in selector '" + selector + "'");
  if (part == "inside") return inside_surface(comp);
  if (part == "outside") {
    const NodeId o = outside_surface(comp);
    if (o == 0) throw ModelError("component '" + name + "' has no outside-surface node");
    return o;
  }
  if (part.rfind("internal", 0) == 0) {
    int k = 0;
    const char* first = part.data() + 8;
    const char* last = part.data() + part.size();
    auto [p, e] = std::from_chars(first, last, k);
    if (e != std::errc() || p != last || k < 1) throw ModelError("bad node selector '" + selector + "'");
    int seen = 0;
    for (const auto& n : nodes)
      if (n.component == comp && n.role == NodeRole::Internal && ++seen == k) return n.id;
    throw ModelError(fmt::format("component '{}' has fewer than {} internal nodes", name, k));
  }
  throw ModelError("bad node selector '" + selector + "'");
}

std::string NodalModel::describe(const BuildingDescription& desc, NodeId id) const {
  if (id < 1 || id > node_count()) return fmt::format("node {}", id);
  const auto& n = nodes[id - 1];
  if (n.component < 0) return to_string(n.role);
  const std::string& name = desc.components[n.component].name;
  if (n.role != NodeRole::Internal) return name + ":" + (n.role == NodeRole::InsideSurface ? "inside" : "outside");
  int k = 0;
  for (const auto& m : nodes) {
    if (m.component == n.component && m.role == NodeRole::Internal) ++k;
    if (m.id == id) break;
  }
  return fmt::format("{}:internal{}", name, k);
}

NodalModel build_mesh(const BuildingDescription& desc) {
  validate(desc);
  NodalModel m;
  auto add_node = [&](NodeRole role, int comp, double capacity) {
    const NodeId id = static_cast<NodeId>(m.nodes.size()) + 1;
    m.nodes.push_back({id, role, comp});
    m.capacities.push_back(capacity);
    return id;
  };

  std::vector<NodeId> inside(desc.components.size());
  for (std::size_t k = 0; k < desc.components.size(); ++k) {
    const auto& c = desc.components[k];
    const int comp = static_cast<int>(k);
    const bool null_flux = c.outside_boundary == OutsideBoundary::NullFlux;
    // A null-flux component's ladder starts at its deep node, which stands in
    // for the outside end of the stack.
    const int ladder_internal = null_flux ? c.internal_node_count - 1 : c.internal_node_count;
    const LadderRC rc = layer_stack_to_rc(c.layers, c.area, ladder_internal);

    std::vector<NodeId> chain;
    for (std::size_t j = 0; j < rc.capacities.size(); ++j) {
      NodeRole role = NodeRole::Internal;
      if (j + 1 == rc.capacities.size())
        role = NodeRole::InsideSurface;
      else if (j == 0 && !null_flux)
        role = NodeRole::OutsideSurface;
      chain.push_back(add_node(role, comp, rc.capacities[j]));
    }
    for (std::size_t j = 0; j + 1 < chain.size(); ++j) add_conductance(m, chain[j], chain[j + 1], rc.conductances[j]);

    if (!null_flux) {
      const NodeId out = chain.front();
      add_input(m, out, kAmbient, c.h_ce * c.area);
      add_input(m, out, kSky, c.h_re * c.area);
      const int ch = solar_channel(c.orientation);
      if (ch >= 0) add_input(m, out, ch, c.absorptivity * c.area);
    }
    inside[k] = chain.back();
  }

  const NodeId radiant = add_node(NodeRole::MeanRadiant, -1, 0.0);
  const NodeId air = add_node(NodeRole::Air, -1, desc.zone.capacity);

  double inside_area = 0.0;
  for (const auto& c : desc.components) inside_area += c.area;

  for (std::size_t k = 0; k < desc.components.size(); ++k) {
    const auto& c = desc.components[k];
    add_conductance(m, inside[k], air, c.h_ci * c.area);
    add_conductance(m, inside[k], radiant, c.h_ri * c.area);
  }
  add_input(m, air, kAmbient, desc.zone.air_specific_heat * desc.zone.ventilation_rate);

  // Solar transmitted through glazing is spread over all inside surfaces by area.
  for (const auto& w : desc.components) {
    if (!w.window) continue;
    const int ch = solar_channel(w.orientation);
    if (ch < 0) continue;
    const double transmitted = desc.glazing_transmitted_fraction * w.area;
    for (std::size_t k = 0; k < desc.components.size(); ++k)
      add_input(m, inside[k], ch, transmitted * desc.components[k].area / inside_area);
  }
  return m;
}

StateMatrices assemble(const NodalModel& model, const BuildingDescription& desc) {
  (void)desc;
  const int n = model.node_count();
  StateMatrices sm;
  sm.capacity = Eigen::Map<const Eigen::VectorXd>(model.capacities.data(), n);
  sm.A = Eigen::MatrixXd::Zero(n, n);
  sm.B = Eigen::MatrixXd::Zero(n, kChannelCount);
  sm.input_channels = channel_labels();

  for (const auto& [ij, g] : model.conductances) {
    sm.A(ij.first - 1, ij.second - 1) += g;
    sm.A(ij.first - 1, ij.first - 1) -= g;
  }
  for (const auto& [node, list] : model.input_couplings) {
    for (const auto& [channel, coefficient] : list) {
      sm.B(node - 1, channel) += coefficient;
      // Temperature channels are conductances and leave the node's diagonal.
      if (channel == kAmbient || channel == kSky) sm.A(node - 1, node - 1) -= coefficient;
    }
  }
  return sm;
}

}  // namespace thermodiag
