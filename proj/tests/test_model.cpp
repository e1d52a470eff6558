#include "fixtures.hpp"
#include "thermodiag/error.hpp"
#include "thermodiag/model.hpp"

#include <doctest.h>

#include <random>

using namespace thermodiag;

TEST_CASE("layer_stack_to_rc: single layer R2C conductance") {
  // area * lambda / thickness = 2 * 0.23 / 0.1
  const auto rc = layer_stack_to_rc({{0.1, 0.23, 600.0, 1600.0}}, 2.0, 0);
  REQUIRE(rc.conductances.size() == 1);
  REQUIRE(rc.capacities.size() == 2);
  CHECK(rc.conductances[0] == doctest::Approx(4.6).epsilon(1e-14));
  const double total_c = 0.1 * 2.0 * 600.0 * 1600.0;
  CHECK(rc.capacities[0] == doctest::Approx(total_c / 2));
  CHECK(rc.capacities[1] == doctest::Approx(total_c / 2));
}

TEST_CASE("layer_stack_to_rc: two layers in series combine harmonically") {
  const Layer a{0.05, 1.0, 1000.0, 1000.0};
  const Layer b{0.02, 0.04, 30.0, 1400.0};
  const double area = 3.0;
  const double ka = area * 1.0 / 0.05;
  const double kb = area * 0.04 / 0.02;
  const auto rc = layer_stack_to_rc({a, b}, area, 0);
  CHECK(rc.conductances[0] == doctest::Approx(1.0 / (1.0 / ka + 1.0 / kb)).epsilon(1e-13));
}

TEST_CASE("layer_stack_to_rc: resistance and capacity preserved for any node count") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Layer> layers;
    const int n_layers = 1 + static_cast<int>(u(rng) * 4);
    double r_total = 0.0, c_total = 0.0;
    const double area = 0.5 + 10.0 * u(rng);
    for (int k = 0; k < n_layers; ++k) {
      Layer l{0.001 + 0.2 * u(rng), 0.02 + 2.0 * u(rng), 20.0 + 3000.0 * u(rng), 300.0 + 1500.0 * u(rng)};
      r_total += l.thickness / (l.conductivity * area);
      c_total += l.thickness * area * l.density * l.specific_heat;
      layers.push_back(l);
    }
    const int internal = static_cast<int>(u(rng) * 6);
    const auto rc = layer_stack_to_rc(layers, area, internal);
    REQUIRE(rc.conductances.size() == static_cast<std::size_t>(internal + 1));
    REQUIRE(rc.capacities.size() == static_cast<std::size_t>(internal + 2));
    double r = 0.0, c = 0.0;
    for (double g : rc.conductances) r += 1.0 / g;
    for (double x : rc.capacities) {
      CHECK(x > 0.0);
      c += x;
    }
    CHECK(r == doctest::Approx(r_total).epsilon(1e-12));
    CHECK(c == doctest::Approx(c_total).epsilon(1e-12));
  }
}

TEST_CASE("layer_stack_to_rc: rejects non-positive fields") {
  CHECK_THROWS_AS(layer_stack_to_rc({{0.1, 0.0, 600.0, 1600.0}}, 2.0, 0), ModelError);
  CHECK_THROWS_AS(layer_stack_to_rc({{-0.1, 0.2, 600.0, 1600.0}}, 2.0, 0), ModelError);
  CHECK_THROWS_AS(layer_stack_to_rc({}, 2.0, 0), ModelError);
}

TEST_CASE("build_mesh: minimal R2C mesh has four nodes in fixed order") {
  const auto m = build_mesh(fixtures::single_wall());
  REQUIRE(m.node_count() == 4);
  CHECK(m.nodes[0].role == NodeRole::OutsideSurface);
  CHECK(m.nodes[1].role == NodeRole::InsideSurface);
  CHECK(m.nodes[2].role == NodeRole::MeanRadiant);
  CHECK(m.nodes[3].role == NodeRole::Air);
  CHECK(m.capacities[2] == 0.0);
}

TEST_CASE("build_mesh: three internal nodes give five wall nodes") {
  const auto m = build_mesh(fixtures::single_wall(3));
  CHECK(m.component_nodes(0).size() == 5);
  CHECK(m.node_count() == 7);
}

TEST_CASE("build_mesh: bundled test cell") {
  const auto desc = fixtures::test_cell();
  const auto m = build_mesh(desc);
  REQUIRE(m.node_count() == 23);
  CHECK(m.air_node() == 23);
  CHECK(m.mean_radiant_node() == 22);
  // Floor: no outside node, deep node (10 cm) then 5 cm node then inside surface.
  const auto floor = m.component_nodes(7);
  REQUIRE(floor.size() == 3);
  CHECK(m.nodes[floor[0] - 1].role == NodeRole::Internal);
  CHECK(m.nodes[floor[1] - 1].role == NodeRole::Internal);
  CHECK(m.nodes[floor[2] - 1].role == NodeRole::InsideSurface);
  CHECK(m.outside_surface(7) == 0);

  CHECK(m.resolve(desc, "east_wall:inside") == 3);
  CHECK(m.resolve(desc, "door:inside") == 14);
  CHECK(m.resolve(desc, "roof:inside") == 16);
  CHECK(m.resolve(desc, "floor:internal1") == 19);
  CHECK(m.resolve(desc, "floor:internal2") == 20);
  CHECK(m.resolve(desc, "air") == 23);
  CHECK(m.resolve(desc, "7") == 7);
  CHECK(m.describe(desc, 20) == "floor:internal2");
  CHECK_THROWS_AS(m.resolve(desc, "floor:outside"), ModelError);
  CHECK_THROWS_AS(m.resolve(desc, "attic:inside"), ModelError);
  CHECK_THROWS_AS(m.resolve(desc, "99"), ModelError);
}

TEST_CASE("build_mesh: deterministic numbering") {
  const auto desc = fixtures::test_cell();
  const auto a = build_mesh(desc);
  const auto b = build_mesh(desc);
  REQUIRE(a.node_count() == b.node_count());
  for (int k = 0; k < a.node_count(); ++k) {
    CHECK(a.nodes[k].role == b.nodes[k].role);
    CHECK(a.nodes[k].component == b.nodes[k].component);
  }
  CHECK(a.conductances == b.conductances);
}

TEST_CASE("build_mesh: invalid descriptions") {
  auto d = fixtures::single_wall();
  d.components.push_back(d.components[0]);
  CHECK_THROWS_WITH_AS(build_mesh(d), doctest::Contains("duplicate"), ModelError);

  d = fixtures::single_wall();
  d.components[0].area = 0.0;
  CHECK_THROWS_WITH_AS(build_mesh(d), doctest::Contains("area"), ModelError);

  d = fixtures::single_wall();
  d.components[0].absorptivity = 1.2;
  CHECK_THROWS_WITH_AS(build_mesh(d), doctest::Contains("absorptivity"), ModelError);

  d = fixtures::single_wall(1);
  d.components[0].outside_boundary = OutsideBoundary::NullFlux;  // a south wall is not a floor
  CHECK_THROWS_AS(build_mesh(d), ModelError);

  d = fixtures::single_wall();
  d.components[0].orientation = Orientation::HorizontalDown;
  d.components[0].outside_boundary = OutsideBoundary::NullFlux;  // no deep node
  CHECK_THROWS_AS(build_mesh(d), ModelError);
}

TEST_CASE("assemble: minimal mesh couplings") {
  const auto desc = fixtures::single_wall();
  const auto sm = assemble(build_mesh(desc), desc);
  const auto& c = desc.components[0];
  const double k = c.area * c.layers[0].conductivity / c.layers[0].thickness;
  REQUIRE(sm.A.rows() == 4);
  CHECK(sm.A(0, 1) == doctest::Approx(k));
  CHECK(sm.A(1, 3) == doctest::Approx(c.h_ci * c.area));
  CHECK(sm.A(1, 2) == doctest::Approx(c.h_ri * c.area));
  CHECK(sm.A(0, 2) == 0.0);
  CHECK(sm.A(0, 3) == 0.0);
  CHECK(sm.A(2, 3) == 0.0);
  CHECK((sm.A - sm.A.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(sm.B(0, kAmbient) == doctest::Approx(c.h_ce * c.area));
  CHECK(sm.B(0, kSky) == doctest::Approx(c.h_re * c.area));
  CHECK(sm.B(0, kSolarSouth) == doctest::Approx(c.absorptivity * c.area));
}

TEST_CASE("assemble: ventilation enters B and the air diagonal") {
  const auto desc = fixtures::single_wall();
  const auto sm = assemble(build_mesh(desc), desc);
  const double cq = desc.zone.air_specific_heat * desc.zone.ventilation_rate;
  CHECK(sm.B(3, kAmbient) == doctest::Approx(cq));
  const double h_ci_s = desc.components[0].h_ci * desc.components[0].area;
  CHECK(sm.A(3, 3) == doctest::Approx(-(h_ci_s + cq)));
}

TEST_CASE("assemble: structural invariants on the test cell") {
  const auto desc = fixtures::test_cell();
  const auto mesh = build_mesh(desc);
  const auto sm = assemble(mesh, desc);
  const int n = sm.node_count();
  for (int i = 0; i < n; ++i) {
    double off = 0.0;
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      CHECK(sm.A(i, j) == sm.A(j, i));
      CHECK(sm.A(i, j) >= 0.0);
      off += sm.A(i, j);
    }
    CHECK(sm.A(i, i) < 0.0);
    const double boundary = sm.B(i, kAmbient) + sm.B(i, kSky);
    CHECK(-sm.A(i, i) == doctest::Approx(off + boundary).epsilon(1e-13));
    CHECK(sm.capacity(i) >= 0.0);
    CHECK((sm.capacity(i) == 0.0) == (i + 1 == mesh.mean_radiant_node()));
  }
}

TEST_CASE("assemble: mean-radiant balance is the area-weighted mean of inside surfaces") {
  const auto desc = fixtures::test_cell();
  const auto mesh = build_mesh(desc);
  const auto sm = assemble(mesh, desc);
  const int rm = mesh.mean_radiant_node() - 1;
  Eigen::VectorXd T = Eigen::VectorXd::LinSpaced(sm.node_count(), 10.0, 32.0);
  // Row balance 0 = sum_j A[rm][j] T_j solved for T_rm.
  double s = 0.0;
  for (int j = 0; j < sm.node_count(); ++j)
    if (j != rm) s += sm.A(rm, j) * T(j);
  const double t_rm = -s / sm.A(rm, rm);
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < desc.components.size(); ++k) {
    const int i = mesh.inside_surface(static_cast<int>(k)) - 1;
    num += desc.components[k].area * T(i);
    den += desc.components[k].area;
  }
  CHECK(t_rm == doctest::Approx(num / den).epsilon(1e-13));
}

TEST_CASE("assemble: transmitted solar is spread over inside surfaces by area") {
  const auto desc = fixtures::test_cell();
  const auto mesh = build_mesh(desc);
  const auto sm = assemble(mesh, desc);
  const auto* window = desc.find("window");
  REQUIRE(window);
  double total = 0.0, area = 0.0;
  for (const auto& c : desc.components) area += c.area;
  for (std::size_t k = 0; k < desc.components.size(); ++k) {
    const int i = mesh.inside_surface(static_cast<int>(k)) - 1;
    total += sm.B(i, kSolarSouth);
    CHECK(sm.B(i, kSolarSouth) ==
          doctest::Approx(desc.glazing_transmitted_fraction * window->area * desc.components[k].area / area));
  }
  CHECK(total == doctest::Approx(desc.glazing_transmitted_fraction * window->area));
}
