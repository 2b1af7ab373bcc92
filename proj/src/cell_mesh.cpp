// Copyright 2026 The perfohom Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <unordered_map>

#include "perfohom/errors.hpp"
#include "perfohom/mesh.hpp"

namespace perfohom
{

namespace
{

struct Triangulation2D
{
  std::vector<std::array<double, 2>> x;
  std::vector<std::array<int, 3>> tris;  // counter-clockwise
  std::vector<char> in_hole;
};

// Splits the quad (a, b, c, d) into four triangles around its centroid. The
// split is invariant under mirroring, which a diagonal split is not.
void add_crossed_quad(Triangulation2D &t, std::array<int, 4> q, bool hole)
{
  std::array<double, 2> m = {0.0, 0.0};
  for (int v : q)
  {
    m[0] += 0.25 * t.x[v][0];
    m[1] += 0.25 * t.x[v][1];
  }
  const int c = static_cast<int>(t.x.size());
  t.x.push_back(m);
  for (int i = 0; i < 4; i++)
  {
    std::array<int, 3> tri = {q[i], q[(i + 1) % 4], c};
    const auto &p0 = t.x[tri[0]], &p1 = t.x[tri[1]], &p2 = t.x[tri[2]];
    const double area =
        (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p1[1] - p0[1]) * (p2[0] - p0[0]);
    if (area < 0.0)
    {
      std::swap(tri[0], tri[1]);
    }
    t.tris.push_back(tri);
    t.in_hole.push_back(hole);
  }
}

int even_at_least(double v, int lo)
{
  int n = std::max(lo, static_cast<int>(std::ceil(v - 1e-12)));
  return n + (n % 2);
}

Triangulation2D box_grid(double b1, double b2, double res)
{
  Triangulation2D t;
  const int n1 = even_at_least(b1 / res, 2), n2 = even_at_least(b2 / res, 2);
  for (int j = 0; j <= n2; j++)
  {
    for (int i = 0; i <= n1; i++)
    {
      t.x.push_back({b1 * i / n1, b2 * j / n2});
    }
  }
  auto id = [n1](int i, int j) { return j * (n1 + 1) + i; };
  for (int j = 0; j < n2; j++)
  {
    for (int i = 0; i < n1; i++)
    {
      add_crossed_quad(t, {id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)}, false);
    }
  }
  return t;
}

// O-grid of the square [0,b1]x[0,b2] around a circle of radius r: an m x m core
// square, an inner ring out to the circle and an outer ring blended onto the
// cell perimeter. With m even the line y1 = b1/2 is covered by grid edges.
Triangulation2D hole_grid(double b1, double b2, double r, double res)
{
  Triangulation2D t;
  const double cx = 0.5 * b1, cy = 0.5 * b2;
  const int m = even_at_least(std::max(b1, b2) / res, 2);
  const int nk = 4 * m;
  const double sc = 0.42 * r;  // core half-size
  const double arc = 2.0 * std::numbers::pi * r / nk;
  const int n_in = std::max(1, static_cast<int>(std::ceil((r - sc) / arc - 1e-12)));
  const double reach = 0.5 * std::max(b1, b2) - r;
  const int n_out = std::max(2, static_cast<int>(std::ceil(reach / res - 1e-12)));

  // Core grid.
  for (int j = 0; j <= m; j++)
  {
    for (int i = 0; i <= m; i++)
    {
      t.x.push_back({cx - sc + 2.0 * sc * i / m, cy - sc + 2.0 * sc * j / m});
    }
  }
  auto core = [m](int i, int j) { return j * (m + 1) + i; };
  for (int j = 0; j < m; j++)
  {
    for (int i = 0; i < m; i++)
    {
      add_crossed_quad(t, {core(i, j), core(i + 1, j), core(i + 1, j + 1), core(i, j + 1)}, true);
    }
  }

  // Walk a square boundary counter-clockwise from the lower-left corner:
  // returns integer grid offsets (i, j) in [0, m]^2.
  auto walk = [m](int k) -> std::array<int, 2>
  {
    const int s = k / m, j = k % m;
    switch (s)
    {
      case 0:
        return {j, 0};
      case 1:
        return {m, j};
      case 2:
        return {m - j, m};
      default:
        return {0, m - j};
    }
  };

  // ring[l][k]: level 0 is the core boundary, n_in the circle, n_in + n_out the perimeter.
  const int levels = n_in + n_out;
  std::vector<std::vector<int>> ring(levels + 1, std::vector<int>(nk));
  for (int k = 0; k < nk; k++)
  {
    const auto w = walk(k);
    ring[0][k] = core(w[0], w[1]);
    const double th = 1.25 * std::numbers::pi + 2.0 * std::numbers::pi * k / nk;
    const std::array<double, 2> c = {cx + r * std::cos(th), cy + r * std::sin(th)};
    const std::array<double, 2> q = t.x[ring[0][k]];
    const std::array<double, 2> p = {b1 * w[0] / m, b2 * w[1] / m};
    for (int l = 1; l <= levels; l++)
    {
      std::array<double, 2> y;
      if (l <= n_in)
      {
        const double s = static_cast<double>(l) / n_in;
        y = {(1.0 - s) * q[0] + s * c[0], (1.0 - s) * q[1] + s * c[1]};
      }
      else
      {
        const double s = std::pow(static_cast<double>(l - n_in) / n_out, 1.4);
        y = {(1.0 - s) * c[0] + s * p[0], (1.0 - s) * c[1] + s * p[1]};
      }
      if (l == levels)
      {
        y = p;
      }
      ring[l][k] = static_cast<int>(t.x.size());
      t.x.push_back(y);
    }
  }
  for (int l = 0; l < levels; l++)
  {
    for (int k = 0; k < nk; k++)
    {
      const int k1 = (k + 1) % nk;
      add_crossed_quad(t, {ring[l][k], ring[l][k1], ring[l + 1][k1], ring[l + 1][k]}, l < n_in);
    }
  }
  return t;
}

std::vector<double> subdivide(const std::vector<double> &breaks, double res)
{
  std::vector<double> z = {breaks.front()};
  for (std::size_t i = 0; i + 1 < breaks.size(); i++)
  {
    const double a = breaks[i], b = breaks[i + 1];
    if (b - a <= 1e-14)
    {
      continue;
    }
    const int n = std::max(1, static_cast<int>(std::ceil((b - a) / res - 1e-12)));
    for (int k = 1; k < n; k++)
    {
      z.push_back(a + (b - a) * k / n);
    }
    z.push_back(b);
  }
  return z;
}

double tet_volume(const std::vector<Vec3> &x, const std::array<int, 4> &t)
{
  const auto &a = x[t[0]], &b = x[t[1]], &c = x[t[2]], &d = x[t[3]];
  const double u[3] = {b[0] - a[0], b[1] - a[1], b[2] - a[2]};
  const double v[3] = {c[0] - a[0], c[1] - a[1], c[2] - a[2]};
  const double w[3] = {d[0] - a[0], d[1] - a[1], d[2] - a[2]};
  return (u[0] * (v[1] * w[2] - v[2] * w[1]) - u[1] * (v[0] * w[2] - v[2] * w[0]) +
          u[2] * (v[0] * w[1] - v[1] * w[0])) /
         6.0;
}

struct FaceHash
{
  std::size_t operator()(const std::array<int, 3> &f) const noexcept
  {
    std::uint64_t h = static_cast<std::uint64_t>(f[0]);
    h = h * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(f[1]);
    h = h * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(f[2]);
    return static_cast<std::size_t>(h ^ (h >> 29));
  }
};

// Straight-hole cell mesh in cell units. `mirrored` reflects y1 -> b1 - y1.
Mesh straight_cell(const CellGeometry &g, double res, bool mirrored)
{
  const double h = g.plate_thickness, kap = g.kappa;
  const bool plate = h > 0.0;
  Triangulation2D t = plate ? hole_grid(g.b1, g.b2, 0.5 * g.hole_diameter, res)
                            : box_grid(g.b1, g.b2, res);

  std::vector<double> breaks = {-0.5 * kap, 0.5 * kap};
  if (plate)
  {
    const double bw = std::min(0.5 * h, 0.5 * (kap - h));
    breaks = {-0.5 * kap, -0.5 * h - bw, -0.5 * h, 0.5 * h, 0.5 * h + bw, 0.5 * kap};
  }
  const std::vector<double> z = subdivide(breaks, res);
  const int nz = static_cast<int>(z.size());
  const double ztol = 1e-12 * kap;
  auto in_plate = [&](int layer)
  {
    const double zm = 0.5 * (z[layer] + z[layer + 1]);
    return plate && std::abs(zm) < 0.5 * h;
  };

  // Mirror-invariant vertex order; no triangle contains a mirror pair.
  const double cx = 0.5 * g.b1, otol = 1e-9 * std::max(g.b1, g.b2);
  auto before = [&](int a, int b)
  {
    const double da = std::abs(t.x[a][0] - cx), db = std::abs(t.x[b][0] - cx);
    if (std::abs(da - db) > otol)
    {
      return da < db;
    }
    return t.x[a][1] < t.x[b][1];
  };

  const int n2 = static_cast<int>(t.x.size());
  std::vector<int> id(static_cast<std::size_t>(n2) * nz, -1);
  std::vector<std::array<int, 4>> tets;  // entries are plane * n2 + node2d
  for (int layer = 0; layer + 1 < nz; layer++)
  {
    const bool solid_layer = in_plate(layer);
    for (std::size_t e = 0; e < t.tris.size(); e++)
    {
      if (solid_layer && !t.in_hole[e])
      {
        continue;
      }
      auto v = t.tris[e];
      std::sort(v.begin(), v.end(), before);
      const int b0 = layer * n2 + v[0], b1 = layer * n2 + v[1], b2 = layer * n2 + v[2];
      const int t0 = b0 + n2, t1 = b1 + n2, t2 = b2 + n2;
      // Each vertical quad face is cut from the bottom of its earlier vertex
      // to the top of its later one.
      tets.push_back({b0, b1, b2, t2});
      tets.push_back({b0, b1, t1, t2});
      tets.push_back({b0, t0, t1, t2});
    }
  }

  Mesh mesh;
  mesh.dim = 3;
  for (const auto &tet : tets)
  {
    for (int v : tet)
    {
      id[v] = 0;
    }
  }
  for (int p = 0; p < nz; p++)
  {
    for (int i = 0; i < n2; i++)
    {
      auto &slot = id[static_cast<std::size_t>(p) * n2 + i];
      if (slot == 0)
      {
        slot = static_cast<int>(mesh.nodes.size());
        const double x1 = mirrored ? g.b1 - t.x[i][0] : t.x[i][0];
        mesh.nodes.push_back({x1, t.x[i][1], z[p]});
      }
    }
  }
  mesh.cells.reserve(tets.size() * 4);
  for (auto tet : tets)
  {
    for (auto &v : tet)
    {
      v = id[v];
    }
    if (tet_volume(mesh.nodes, tet) < 0.0)
    {
      std::swap(tet[0], tet[1]);
    }
    mesh.cells.insert(mesh.cells.end(), tet.begin(), tet.end());
  }

  // Boundary facets appear in exactly one tetrahedron.
  std::unordered_map<std::array<int, 3>, std::array<int, 4>, FaceHash> faces;
  static constexpr int opp[4][3] = {{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}};  // outward
  for (std::size_t c = 0; c < mesh.num_cells(); c++)
  {
    auto v = mesh.cell(c);
    for (const auto &o : opp)
    {
      std::array<int, 3> f = {v[o[0]], v[o[1]], v[o[2]]};
      std::array<int, 3> key = f;
      std::sort(key.begin(), key.end());
      auto [it, fresh] = faces.try_emplace(key, std::array<int, 4>{f[0], f[1], f[2], 1});
      if (!fresh)
      {
        it->second[3]++;
      }
    }
  }
  std::vector<std::array<int, 3>> boundary;
  for (const auto &[key, f] : faces)
  {
    if (f[3] == 1)
    {
      boundary.push_back({f[0], f[1], f[2]});
    }
  }
  std::sort(boundary.begin(), boundary.end(),
            [](const auto &a, const auto &b)
            {
              auto sa = a, sb = b;
              std::sort(sa.begin(), sa.end());
              std::sort(sb.begin(), sb.end());
              return sa < sb;
            });
  auto &top = mesh.facet_groups[groups::kTop];
  auto &bottom = mesh.facet_groups[groups::kBottom];
  auto &lateral = mesh.facet_groups[groups::kLateral];
  auto &wall = mesh.facet_groups[groups::kSolidWall];
  const double ltol = 1e-12 * std::max(g.b1, g.b2);
  for (const auto &f : boundary)
  {
    auto all = [&](auto pred)
    { return pred(mesh.nodes[f[0]]) && pred(mesh.nodes[f[1]]) && pred(mesh.nodes[f[2]]); };
    std::vector<int> *dst = &wall;
    if (all([&](const Vec3 &p) { return std::abs(p[2] - 0.5 * kap) < ztol; }))
    {
      dst = &top;
    }
    else if (all([&](const Vec3 &p) { return std::abs(p[2] + 0.5 * kap) < ztol; }))
    {
      dst = &bottom;
    }
    else if (all([&](const Vec3 &p) { return std::abs(p[0]) < ltol; }) ||
             all([&](const Vec3 &p) { return std::abs(p[0] - g.b1) < ltol; }) ||
             all([&](const Vec3 &p) { return std::abs(p[1]) < ltol; }) ||
             all([&](const Vec3 &p) { return std::abs(p[1] - g.b2) < ltol; }))
    {
      dst = &lateral;
    }
    dst->insert(dst->end(), f.begin(), f.end());
  }
  return mesh;
}

}  // namespace

Mesh generate_unit_cell_mesh(const CellGeometry &geom, double resolution)
{
  geom.validate();
  if (!(resolution > 0.0))
  {
    throw InvalidArgument("mesh resolution must be positive");
  }
  const double phi = geom.hole_slope_deg * std::numbers::pi / 180.0;
  Mesh mesh = straight_cell(geom, resolution, phi < 0.0);

  const double h = geom.plate_thickness;
  if (h > 0.0 && phi != 0.0)
  {
    const double bw = std::min(0.5 * h, 0.5 * (geom.kappa - h));
    const double tn = std::tan(phi);
    for (auto &p : mesh.nodes)
    {
      const double az = std::abs(p[2]);
      double s = 0.0;
      if (az <= 0.5 * h)
      {
        s = p[2];
      }
      else if (az < 0.5 * h + bw)
      {
        s = std::copysign(0.5 * h * (1.0 - (az - 0.5 * h) / bw), p[2]);
      }
      p[0] += s * tn;
    }
  }
  check_orientation(mesh);

  const std::array<Vec3, 2> periods = {Vec3{geom.b1, 0.0, 0.0}, Vec3{0.0, geom.b2, 0.0}};
  mesh.periodic_pairs = detect_periodic_pairs(mesh, periods, 1e-9 * mesh_diameter(mesh));
  return mesh;
}

}  // namespace perfohom
