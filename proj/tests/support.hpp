// Copyright 2026 The perfohom Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PERFOHOM_TESTS_SUPPORT_HPP
#define PERFOHOM_TESTS_SUPPORT_HPP

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "perfohom/mesh.hpp"

namespace test
{

// Unit square split into 2 n^2 counter-clockwise triangles; boundary facets in "boundary".
inline perfohom::Mesh unit_square(int n)
{
  perfohom::Mesh m;
  m.dim = 2;
  auto id = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j <= n; j++)
  {
    for (int i = 0; i <= n; i++)
    {
      m.nodes.push_back({static_cast<double>(i) / n, static_cast<double>(j) / n, 0.0});
    }
  }
  auto &bd = m.facet_groups["boundary"];
  for (int j = 0; j < n; j++)
  {
    for (int i = 0; i < n; i++)
    {
      const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
      // Alternate the diagonal so the mesh has no preferred direction.
      if ((i + j) % 2 == 0)
      {
        m.cells.insert(m.cells.end(), {a, b, c, a, c, d});
      }
      else
      {
        m.cells.insert(m.cells.end(), {a, b, d, b, c, d});
      }
      if (j == 0)
      {
        bd.insert(bd.end(), {a, b});
      }
      if (i == n - 1)
      {
        bd.insert(bd.end(), {b, c});
      }
      if (j == n - 1)
      {
        bd.insert(bd.end(), {c, d});
      }
      if (i == 0)
      {
        bd.insert(bd.end(), {d, a});
      }
    }
  }
  return m;
}

//
// Straight channel [0, w] x [0, h] with the whole bottom as inlet, the top
// as outlet and Gamma0 at mid height with doubled nodes.
//
inline perfohom::Mesh straight_duct(double w, double h, int nx, int nz)
{
  namespace g = perfohom::groups;
  perfohom::Mesh m;
  m.dim = 2;
  const int jg = nz / 2;
  std::vector<std::vector<int>> lower(nz + 1, std::vector<int>(nx + 1, -1));
  auto upper = lower;
  for (int j = 0; j <= nz; j++)
  {
    for (int i = 0; i <= nx; i++)
    {
      const perfohom::Vec3 x{w * i / nx, h * j / nz, 0.0};
      if (j <= jg)
      {
        lower[j][i] = static_cast<int>(m.nodes.size());
        m.nodes.push_back(x);
      }
      if (j >= jg)
      {
        upper[j][i] = static_cast<int>(m.nodes.size());
        m.nodes.push_back(x);
      }
    }
  }
  for (int j = 0; j < nz; j++)
  {
    const auto &ids = j < jg ? lower : upper;
    for (int i = 0; i < nx; i++)
    {
      const int a = ids[j][i], b = ids[j][i + 1], c = ids[j + 1][i + 1], d = ids[j + 1][i];
      m.cells.insert(m.cells.end(), {a, b, c, a, c, d});
      if (j == 0)
      {
        m.facet_groups[g::kInlet].insert(m.facet_groups[g::kInlet].end(), {a, b});
      }
      else if (j == jg)
      {
        m.facet_groups[g::kInterfacePlus].insert(m.facet_groups[g::kInterfacePlus].end(), {a, b});
      }
      if (j == nz - 1)
      {
        m.facet_groups[g::kOutlet].insert(m.facet_groups[g::kOutlet].end(), {c, d});
      }
      else if (j + 1 == jg)
      {
        m.facet_groups[g::kInterfaceMinus].insert(m.facet_groups[g::kInterfaceMinus].end(),
                                                  {c, d});
      }
      if (i == nx - 1)
      {
        m.facet_groups[g::kDuctWall].insert(m.facet_groups[g::kDuctWall].end(), {b, c});
      }
      if (i == 0)
      {
        m.facet_groups[g::kDuctWall].insert(m.facet_groups[g::kDuctWall].end(), {d, a});
      }
    }
  }
  return m;
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string &tag)
{
  static std::mt19937_64 rng(std::random_device{}());
  auto p = std::filesystem::temp_directory_path() /
           ("perfohom-" + tag + "-" + std::to_string(rng() % 1000000007ULL));
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline std::string slurp(const std::filesystem::path &p)
{
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace test

#endif  // PERFOHOM_TESTS_SUPPORT_HPP
