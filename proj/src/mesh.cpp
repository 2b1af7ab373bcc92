// Copyright 2026 The perfohom Authors
// SPDX-License-Identifier: Apache-2.0

#include "perfohom/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "perfohom/errors.hpp"

namespace perfohom
{

const std::vector<int> &Mesh::group(const std::string &name) const
{
  auto it = facet_groups.find(name);
  if (it == facet_groups.end())
  {
    throw InvalidArgument("unknown facet group '" + name + "'");
  }
  return it->second;
}

void CellGeometry::validate() const
{
  if (!(b1 > 0.0) || !(b2 > 0.0))
  {
    throw InvalidArgument("cell periods b1, b2 must be positive");
  }
  if (!(kappa > 0.0))
  {
    throw InvalidArgument("kappa must be positive");
  }
  if (!(plate_thickness >= 0.0) || !(plate_thickness < kappa))
  {
    throw InvalidArgument("plate thickness must satisfy 0 <= h < kappa");
  }
  if (plate_thickness > 0.0 && (!(hole_diameter > 0.0) || !(hole_diameter < std::min(b1, b2))))
  {
    throw InvalidArgument("hole diameter must satisfy 0 < d < min(b1, b2)");
  }
  if (!(std::abs(hole_slope_deg) < 90.0))
  {
    throw InvalidArgument("hole slope must satisfy |phi| < 90 deg");
  }
  if (!(eps0 > 0.0))
  {
    throw InvalidArgument("eps0 must be positive");
  }
}

void WaveguideGeometry::validate() const
{
  if (!(l_m > 0.0) || !(h_m > 0.0) || !(l_io > 0.0) || !(h_io > 0.0) || !(width > 0.0))
  {
    throw InvalidArgument("waveguide dimensions must all be positive");
  }
  if (!(interface_height > 0.0) || !(interface_height < h_m))
  {
    throw InvalidArgument("interface must lie strictly inside the chamber");
  }
  const double c = 0.5 * l_m + port_offset;
  if (!(c - 0.5 * h_io > 0.0) || !(c + 0.5 * h_io < l_m))
  {
    throw InvalidArgument("pipes must fit strictly inside the chamber width");
  }
}

namespace
{

Vec3 sub(const Vec3 &a, const Vec3 &b)
{
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}

Vec3 cross(const Vec3 &a, const Vec3 &b)
{
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

double norm(const Vec3 &a)
{
  return std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]);
}

}  // namespace

double cell_measure(const Mesh &mesh, std::size_t c)
{
  auto v = mesh.cell(c);
  const auto &x = mesh.nodes;
  if (mesh.dim == 2)
  {
    const auto a = sub(x[v[1]], x[v[0]]), b = sub(x[v[2]], x[v[0]]);
    return 0.5 * (a[0] * b[1] - a[1] * b[0]);
  }
  const auto a = sub(x[v[1]], x[v[0]]), b = sub(x[v[2]], x[v[0]]), d = sub(x[v[3]], x[v[0]]);
  const auto n = cross(a, b);
  return (n[0] * d[0] + n[1] * d[1] + n[2] * d[2]) / 6.0;
}

double total_measure(const Mesh &mesh)
{
  double s = 0.0;
  for (std::size_t c = 0; c < mesh.num_cells(); c++)
  {
    s += cell_measure(mesh, c);
  }
  return s;
}

double facet_measure(const Mesh &mesh, std::span<const int> f)
{
  const auto &x = mesh.nodes;
  if (mesh.dim == 2)
  {
    return norm(sub(x[f[1]], x[f[0]]));
  }
  return 0.5 * norm(cross(sub(x[f[1]], x[f[0]]), sub(x[f[2]], x[f[0]])));
}

double group_measure(const Mesh &mesh, const std::string &name)
{
  const auto &g = mesh.group(name);
  const std::size_t k = mesh.dim;
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); i += k)
  {
    s += facet_measure(mesh, std::span<const int>(g.data() + i, k));
  }
  return s;
}

double mesh_diameter(const Mesh &mesh)
{
  if (mesh.nodes.empty())
  {
    return 0.0;
  }
  Vec3 lo = mesh.nodes[0], hi = mesh.nodes[0];
  for (const auto &p : mesh.nodes)
  {
    for (int d = 0; d < 3; d++)
    {
      lo[d] = std::min(lo[d], p[d]);
      hi[d] = std::max(hi[d], p[d]);
    }
  }
  return norm(sub(hi, lo));
}

void check_orientation(const Mesh &mesh)
{
  for (std::size_t c = 0; c < mesh.num_cells(); c++)
  {
    const double v = cell_measure(mesh, c);
    if (!(v > 0.0))
    {
      std::ostringstream msg;
      msg << "cell " << c << " is inverted or degenerate (signed measure " << v << ")";
      throw GeometryError(msg.str());
    }
  }
}

std::vector<PeriodicPair> detect_periodic_pairs(const Mesh &mesh, std::span<const Vec3> periods,
                                                double tol, const std::string &required_group)
{
  if (!(tol > 0.0))
  {
    throw InvalidArgument("periodic matching tolerance must be positive");
  }
  // Buckets of width 2 tol: a match within tol lies in one of the 27 neighbours.
  const double h = 2.0 * tol;
  using Key = std::array<std::int64_t, 3>;
  auto key_of = [h](const Vec3 &p)
  {
    return Key{static_cast<std::int64_t>(std::floor(p[0] / h)),
               static_cast<std::int64_t>(std::floor(p[1] / h)),
               static_cast<std::int64_t>(std::floor(p[2] / h))};
  };
  struct KeyHash
  {
    std::size_t operator()(const Key &k) const noexcept
    {
      std::uint64_t x = static_cast<std::uint64_t>(k[0]) * 0x9E3779B97F4A7C15ULL;
      x ^= static_cast<std::uint64_t>(k[1]) * 0xC2B2AE3D27D4EB4FULL + (x << 6) + (x >> 2);
      x ^= static_cast<std::uint64_t>(k[2]) * 0x165667B19E3779F9ULL + (x << 6) + (x >> 2);
      return static_cast<std::size_t>(x);
    }
  };
  std::unordered_map<Key, std::vector<int>, KeyHash> buckets;
  for (std::size_t i = 0; i < mesh.nodes.size(); i++)
  {
    buckets[key_of(mesh.nodes[i])].push_back(static_cast<int>(i));
  }
  auto find = [&](const Vec3 &p) -> int
  {
    const Key k = key_of(p);
    int best = -1;
    double best_d = tol;
    for (int a = -1; a <= 1; a++)
      for (int b = -1; b <= 1; b++)
        for (int c = -1; c <= 1; c++)
        {
          auto it = buckets.find(Key{k[0] + a, k[1] + b, k[2] + c});
          if (it == buckets.end())
          {
            continue;
          }
          for (int j : it->second)
          {
            const double d = norm(sub(mesh.nodes[j], p));
            if (d <= best_d)
            {
              best_d = d;
              best = j;
            }
          }
        }
    return best;
  };

  std::vector<PeriodicPair> pairs;
  std::vector<char> paired(mesh.nodes.size(), 0);
  for (std::size_t k = 0; k < periods.size(); k++)
  {
    for (std::size_t i = 0; i < mesh.nodes.size(); i++)
    {
      const auto &x = mesh.nodes[i];
      const Vec3 y = {x[0] + periods[k][0], x[1] + periods[k][1], x[2] + periods[k][2]};
      const int j = find(y);
      if (j >= 0 && j != static_cast<int>(i))
      {
        pairs.push_back({static_cast<int>(i), j, static_cast<int>(k) + 1});
        paired[i] = paired[j] = 1;
      }
    }
  }
  if (!required_group.empty() && mesh.has_group(required_group))
  {
    std::ostringstream unmatched;
    int count = 0;
    for (int n : mesh.group(required_group))
    {
      if (!paired[n])
      {
        if (count < 10)
        {
          const auto &p = mesh.nodes[n];
          unmatched << " #" << n << "(" << p[0] << ", " << p[1] << ", " << p[2] << ")";
        }
        paired[n] = 1;  // report each node once
        count++;
      }
    }
    if (count > 0)
    {
      throw GeometryError(std::to_string(count) +
                          " boundary nodes have no periodic partner:" + unmatched.str());
    }
  }
  return pairs;
}

WaveguideTopology analyze_waveguide(const Mesh &mesh)
{
  if (mesh.dim != 2)
  {
    throw InvalidArgument("waveguide mesh must be two-dimensional");
  }
  const std::size_t nc = mesh.num_cells();
  // Union-find over cells through shared nodes.
  std::vector<int> parent(nc);
  std::iota(parent.begin(), parent.end(), 0);
  auto root = [&](int a)
  {
    while (parent[a] != a)
    {
      parent[a] = parent[parent[a]];
      a = parent[a];
    }
    return a;
  };
  std::vector<int> owner(mesh.num_nodes(), -1);
  for (std::size_t c = 0; c < nc; c++)
  {
    for (int v : mesh.cell(c))
    {
      if (owner[v] < 0)
      {
        owner[v] = static_cast<int>(c);
      }
      else
      {
        const int a = root(owner[v]), b = root(static_cast<int>(c));
        if (a != b)
        {
          parent[std::max(a, b)] = std::min(a, b);
        }
      }
    }
  }
  const auto &inlet = mesh.group(groups::kInlet);
  const auto &outlet = mesh.group(groups::kOutlet);
  if (inlet.empty() || outlet.empty())
  {
    throw GeometryError("waveguide mesh needs nonempty inlet and outlet groups");
  }
  const int rin = root(owner[inlet[0]]);
  const int rout = root(owner[outlet[0]]);
  if (rin == rout)
  {
    throw GeometryError("inlet and outlet are connected: interface nodes are not doubled");
  }
  WaveguideTopology topo;
  topo.region.resize(nc);
  for (std::size_t c = 0; c < nc; c++)
  {
    const int r = root(static_cast<int>(c));
    if (r == rin)
    {
      topo.region[c] = 0;
    }
    else if (r == rout)
    {
      topo.region[c] = 1;
    }
    else
    {
      throw GeometryError("waveguide mesh has a component touching neither port");
    }
  }

  auto sorted_nodes = [&](const std::string &name)
  {
    std::vector<int> n(mesh.group(name));
    std::sort(n.begin(), n.end());
    n.erase(std::unique(n.begin(), n.end()), n.end());
    std::sort(n.begin(), n.end(),
              [&](int a, int b) { return mesh.nodes[a][0] < mesh.nodes[b][0]; });
    return n;
  };
  topo.minus_nodes = sorted_nodes(groups::kInterfaceMinus);
  topo.plus_nodes = sorted_nodes(groups::kInterfacePlus);
  if (topo.minus_nodes.size() != topo.plus_nodes.size() || topo.minus_nodes.size() < 2)
  {
    throw GeometryError("interface traces do not match");
  }
  const double tol = 1e-9 * mesh_diameter(mesh);
  for (std::size_t i = 0; i < topo.minus_nodes.size(); i++)
  {
    const auto &a = mesh.nodes[topo.minus_nodes[i]];
    const auto &b = mesh.nodes[topo.plus_nodes[i]];
    if (norm(sub(a, b)) > tol)
    {
      throw GeometryError("interface node " + std::to_string(i) + " has no coincident partner");
    }
    if (topo.region[owner[topo.minus_nodes[i]]] != 0 || topo.region[owner[topo.plus_nodes[i]]] != 1)
    {
      throw GeometryError("interface traces are attached to the wrong subdomains");
    }
    topo.x1.push_back(a[0]);
  }
  return topo;
}

}  // namespace perfohom
