// Copyright 2026 The perfohom Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "perfohom/errors.hpp"
#include "perfohom/mesh.hpp"
#include "support.hpp"

using namespace perfohom;

TEST_CASE("empty cell fills the box exactly")
{
  CellGeometry g;
  g.plate_thickness = 0.0;
  const Mesh m = generate_unit_cell_mesh(g, 0.25);
  CHECK(m.dim == 3);
  CHECK(total_measure(m) == doctest::Approx(g.cell_volume()).epsilon(1e-13));
  CHECK(group_measure(m, groups::kTop) == doctest::Approx(g.xi_area()).epsilon(1e-13));
  CHECK(group_measure(m, groups::kBottom) == doctest::Approx(g.xi_area()).epsilon(1e-13));
}

TEST_CASE("plate volume: sheared hole keeps its horizontal section")
{
  CellGeometry g;
  const double h = g.plate_thickness, r = 0.5 * g.hole_diameter;
  const double circle = 1.0 - h * (1.0 - std::numbers::pi * r * r);
  double straight = 0.0;
  for (double phi : {0.0, 30.0, 60.0, -30.0})
  {
    g.hole_slope_deg = phi;
    const Mesh m = generate_unit_cell_mesh(g, 0.1);
    check_orientation(m);
    const double v = total_measure(m);
    if (phi == 0.0)
    {
      straight = v;
      // Polygonal hole: within one percent of the circular one.
      CHECK(std::abs(v - circle) < 1e-2 * circle);
    }
    CHECK(v == doctest::Approx(straight).epsilon(1e-12));
    CHECK(group_measure(m, groups::kTop) == doctest::Approx(1.0).epsilon(1e-13));
  }
}

TEST_CASE("periodic pairs differ by one period and cover the lateral faces")
{
  CellGeometry g;
  g.hole_slope_deg = 30.0;
  const Mesh m = generate_unit_cell_mesh(g, 0.1);
  REQUIRE(!m.periodic_pairs.empty());
  for (const auto &p : m.periodic_pairs)
  {
    const Vec3 &a = m.nodes[p.master], &b = m.nodes[p.slave];
    const int d = p.direction - 1;
    for (int k = 0; k < 3; k++)
    {
      const double expect = k == d ? 1.0 : 0.0;
      CHECK(std::abs((b[k] - a[k]) - expect) < 1e-12);
    }
  }
  std::set<int> paired;
  for (const auto &p : m.periodic_pairs)
  {
    paired.insert(p.master);
    paired.insert(p.slave);
  }
  for (int n : m.group(groups::kLateral))
  {
    CHECK(paired.count(n) == 1);
  }
}

TEST_CASE("negative slope is the mirror image of the positive one")
{
  CellGeometry g;
  g.hole_slope_deg = 30.0;
  const Mesh pos = generate_unit_cell_mesh(g, 0.1);
  g.hole_slope_deg = -30.0;
  const Mesh neg = generate_unit_cell_mesh(g, 0.1);
  REQUIRE(pos.num_nodes() == neg.num_nodes());
  REQUIRE(pos.num_cells() == neg.num_cells());
  std::multiset<std::array<long long, 3>> a, b;
  auto key = [](double x, double y, double z)
  { return std::array<long long, 3>{std::llround(x * 1e9), std::llround(y * 1e9), std::llround(z * 1e9)}; };
  for (const auto &p : pos.nodes)
  {
    a.insert(key(1.0 - p[0], p[1], p[2]));
  }
  for (const auto &p : neg.nodes)
  {
    b.insert(key(p[0], p[1], p[2]));
  }
  CHECK(a == b);
}

TEST_CASE("cell geometry validation")
{
  CellGeometry g;
  g.plate_thickness = 1.0;
  CHECK_THROWS_AS(generate_unit_cell_mesh(g, 0.1), InvalidArgument);
  g = {};
  g.hole_diameter = 1.2;
  CHECK_THROWS_AS(generate_unit_cell_mesh(g, 0.1), InvalidArgument);
  g = {};
  g.hole_slope_deg = 90.0;
  CHECK_THROWS_AS(generate_unit_cell_mesh(g, 0.1), InvalidArgument);
  CHECK_THROWS_AS(generate_unit_cell_mesh(CellGeometry{}, 0.0), InvalidArgument);
}

TEST_CASE("waveguide mesh measures and topology")
{
  WaveguideGeometry g;
  const Mesh m = generate_waveguide_mesh(g, 0.01);
  CHECK(m.dim == 2);
  CHECK(total_measure(m) == doctest::Approx(g.l_m * g.h_m + 2 * g.l_io * g.h_io).epsilon(1e-12));
  CHECK(group_measure(m, groups::kInlet) == doctest::Approx(g.h_io).epsilon(1e-12));
  CHECK(group_measure(m, groups::kOutlet) == doctest::Approx(g.h_io).epsilon(1e-12));
  CHECK(group_measure(m, groups::kInterfacePlus) == doctest::Approx(g.l_m).epsilon(1e-12));
  CHECK(group_measure(m, groups::kInterfaceMinus) == doctest::Approx(g.l_m).epsilon(1e-12));

  const WaveguideTopology t = analyze_waveguide(m);
  REQUIRE(t.num_interface_nodes() >= 2);
  CHECK(t.x1.front() == doctest::Approx(0.0));
  CHECK(t.x1.back() == doctest::Approx(g.l_m));
  double area[2] = {0.0, 0.0};
  for (std::size_t c = 0; c < m.num_cells(); c++)
  {
    area[t.region[c]] += cell_measure(m, c);
  }
  CHECK(area[0] == doctest::Approx(g.l_m * g.interface_height + g.l_io * g.h_io));
  CHECK(area[1] == doctest::Approx(g.l_m * (g.h_m - g.interface_height) + g.l_io * g.h_io));
  for (std::size_t i = 0; i < t.num_interface_nodes(); i++)
  {
    CHECK(t.plus_nodes[i] != t.minus_nodes[i]);
    CHECK(m.nodes[t.plus_nodes[i]] == m.nodes[t.minus_nodes[i]]);
    if (i > 0)
    {
      CHECK(t.x1[i] > t.x1[i - 1]);
    }
  }
}

TEST_CASE("waveguide topology rejects glued traces")
{
  Mesh m = test::straight_duct(0.1, 0.2, 4, 6);
  CHECK_NOTHROW(analyze_waveguide(m));
  // Point the upper trace at the lower nodes: inlet and outlet become connected.
  const WaveguideTopology t = analyze_waveguide(m);
  for (auto &v : m.cells)
  {
    for (std::size_t i = 0; i < t.plus_nodes.size(); i++)
    {
      if (v == t.plus_nodes[i])
      {
        v = t.minus_nodes[i];
      }
    }
  }
  CHECK_THROWS_AS(analyze_waveguide(m), GeometryError);
}

TEST_CASE("mesh text round trip with fields")
{
  CellGeometry g;
  g.hole_slope_deg = 30.0;
  const Mesh m = generate_unit_cell_mesh(g, 0.25);
  std::vector<NodalField> fields = {{"s", 1, std::vector<double>(m.num_nodes())},
                                    {"v", 3, std::vector<double>(3 * m.num_nodes())}};
  for (std::size_t i = 0; i < m.num_nodes(); i++)
  {
    fields[0].values[i] = std::sin(1.0 + static_cast<double>(i)) / 3.0;
    for (int k = 0; k < 3; k++)
    {
      fields[1].values[3 * i + k] = m.nodes[i][k] * 1e-7 + k;
    }
  }
  const auto dir = test::temp_dir("mesh");
  save_mesh(m, dir / "a.pmesh", fields);
  std::vector<NodalField> back;
  const Mesh r = load_mesh(dir / "a.pmesh", &back);
  CHECK(r == m);
  CHECK(back == fields);
  CHECK(format_mesh(r, back) == test::slurp(dir / "a.pmesh"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("mesh parse errors carry line numbers")
{
  CHECK_THROWS_AS(parse_mesh("nonsense\n"), ParseError);
  CHECK_THROWS_AS(parse_mesh("perfomesh v9\n"), ParseError);
  const std::string ok = format_mesh(test::unit_square(2));
  CHECK_NOTHROW(parse_mesh(ok));
  const std::string cut = ok.substr(0, ok.size() / 2);
  try
  {
    parse_mesh(cut);
    FAIL("truncated mesh accepted");
  }
  catch (const ParseError &e)
  {
    CHECK(e.line() > 1);
  }
}
