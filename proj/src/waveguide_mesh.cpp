// Copyright 2026 The perfohom Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <array>
#include <cmath>
#include <map>

#include "perfohom/errors.hpp"
#include "perfohom/mesh.hpp"

namespace perfohom
{

namespace
{

std::vector<double> graded_axis(std::vector<double> breaks, double res)
{
  std::sort(breaks.begin(), breaks.end());
  std::vector<double> x = {breaks.front()};
  for (std::size_t i = 0; i + 1 < breaks.size(); i++)
  {
    const double a = breaks[i], b = breaks[i + 1];
    if (b - a <= 1e-12 * (std::abs(a) + std::abs(b) + 1.0))
    {
      continue;
    }
    const int n = std::max(1, static_cast<int>(std::ceil((b - a) / res - 1e-9)));
    for (int k = 1; k < n; k++)
    {
      x.push_back(a + (b - a) * k / n);
    }
    x.push_back(b);
  }
  return x;
}

}  // namespace

Mesh generate_waveguide_mesh(const WaveguideGeometry &g, double resolution)
{
  g.validate();
  if (!(resolution > 0.0))
  {
    throw InvalidArgument("mesh resolution must be positive");
  }
  const double c = 0.5 * g.l_m + g.port_offset;
  const double p0 = c - 0.5 * g.h_io, p1 = c + 0.5 * g.h_io;
  const double top = g.h_m + g.l_io;
  const auto xs = graded_axis({0.0, p0, p1, g.l_m}, resolution);
  const auto zs = graded_axis({-g.l_io, 0.0, g.interface_height, g.h_m, top}, resolution);
  const int nx = static_cast<int>(xs.size()), nz = static_cast<int>(zs.size());
  int jg = -1;
  for (int j = 0; j < nz; j++)
  {
    if (zs[j] == g.interface_height)
    {
      jg = j;
    }
  }

  auto fluid = [&](double xm, double zm)
  {
    if (zm > 0.0 && zm < g.h_m)
    {
      return xm > 0.0 && xm < g.l_m;
    }
    return (zm > -g.l_io && zm < top) && xm > p0 && xm < p1;
  };

  Mesh mesh;
  mesh.dim = 2;
  // Nodes are stored as (x1, x3, 0). The interface row carries a second copy
  // of each grid node for the upper side.
  std::map<std::array<int, 3>, int> grid;
  auto node = [&](int i, int j, int side)
  {
    const int s = (j == jg) ? side : 0;
    auto [it, fresh] = grid.try_emplace({j, s, i}, 0);
    if (fresh)
    {
      it->second = static_cast<int>(mesh.nodes.size());
      mesh.nodes.push_back({xs[i], zs[j], 0.0});
    }
    return it->second;
  };

  struct Quad
  {
    int i, j;
  };
  std::vector<Quad> quads;
  for (int j = 0; j + 1 < nz; j++)
  {
    for (int i = 0; i + 1 < nx; i++)
    {
      if (fluid(0.5 * (xs[i] + xs[i + 1]), 0.5 * (zs[j] + zs[j + 1])))
      {
        quads.push_back({i, j});
      }
    }
  }
  // Number grid nodes before adding centroid nodes.
  for (const auto &q : quads)
  {
    const int side = q.j >= jg ? 1 : 0;
    node(q.i, q.j, side);
    node(q.i + 1, q.j, side);
    node(q.i + 1, q.j + 1, side);
    node(q.i, q.j + 1, side);
  }

  auto in_fluid = [&](int i, int j)
  {
    return i >= 0 && j >= 0 && i + 1 < nx && j + 1 < nz &&
           fluid(0.5 * (xs[i] + xs[i + 1]), 0.5 * (zs[j] + zs[j + 1]));
  };
  auto &inlet = mesh.facet_groups[groups::kInlet];
  auto &outlet = mesh.facet_groups[groups::kOutlet];
  auto &walls = mesh.facet_groups[groups::kDuctWall];
  auto &gplus = mesh.facet_groups[groups::kInterfacePlus];
  auto &gminus = mesh.facet_groups[groups::kInterfaceMinus];

  for (const auto &q : quads)
  {
    const int side = q.j >= jg ? 1 : 0;
    const int a = node(q.i, q.j, side), b = node(q.i + 1, q.j, side);
    const int cc = node(q.i + 1, q.j + 1, side), d = node(q.i, q.j + 1, side);
    const int m = static_cast<int>(mesh.nodes.size());
    mesh.nodes.push_back({0.5 * (xs[q.i] + xs[q.i + 1]), 0.5 * (zs[q.j] + zs[q.j + 1]), 0.0});
    const std::array<int, 4> v = {a, b, cc, d};
    for (int k = 0; k < 4; k++)
    {
      mesh.cells.insert(mesh.cells.end(), {v[k], v[(k + 1) % 4], m});
    }

    // Boundary and interface edges, oriented with the domain on the left.
    if (!in_fluid(q.i, q.j - 1))
    {
      auto &dst = q.j == 0 ? inlet : walls;
      dst.insert(dst.end(), {a, b});
    }
    else if (q.j == jg)
    {
      gplus.insert(gplus.end(), {a, b});
    }
    if (!in_fluid(q.i, q.j + 1))
    {
      auto &dst = q.j + 2 == nz ? outlet : walls;
      dst.insert(dst.end(), {cc, d});
    }
    else if (q.j + 1 == jg)
    {
      gminus.insert(gminus.end(), {cc, d});
    }
    if (!in_fluid(q.i + 1, q.j))
    {
      walls.insert(walls.end(), {b, cc});
    }
    if (!in_fluid(q.i - 1, q.j))
    {
      walls.insert(walls.end(), {d, a});
    }
  }
  check_orientation(mesh);
  return mesh;
}

}  // namespace perfohom
