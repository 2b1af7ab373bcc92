// Copyright 2026 The perfohom Authors
// SPDX-License-Identifier: Apache-2.0

#include "perfohom/kernels.hpp"

#include <cmath>
#include <string>

#include "perfohom/errors.hpp"

namespace perfohom
{

Element make_element(const Mesh &mesh, std::size_t c)
{
  Element e;
  e.dim = mesh.dim;
  e.n = mesh.dim + 1;
  auto cell = mesh.cell(c);
  for (int a = 0; a < e.n; a++)
  {
    e.v[a] = cell[a];
  }
  const auto &x0 = mesh.nodes[e.v[0]];
  if (mesh.dim == 2)
  {
    const auto &x1 = mesh.nodes[e.v[1]], &x2 = mesh.nodes[e.v[2]];
    const double j00 = x1[0] - x0[0], j01 = x2[0] - x0[0];
    const double j10 = x1[1] - x0[1], j11 = x2[1] - x0[1];
    const double det = j00 * j11 - j01 * j10;
    if (!(std::abs(det) > 0.0))
    {
      throw GeometryError("degenerate triangle " + std::to_string(c));
    }
    e.measure = 0.5 * std::abs(det);
    // Rows of J^{-1} are the gradients of lambda_1, lambda_2.
    e.grad[1] = {j11 / det, -j01 / det, 0.0};
    e.grad[2] = {-j10 / det, j00 / det, 0.0};
    e.grad[0] = {-e.grad[1][0] - e.grad[2][0], -e.grad[1][1] - e.grad[2][1], 0.0};
    return e;
  }
  double j[3][3];
  for (int k = 0; k < 3; k++)
  {
    const auto &xk = mesh.nodes[e.v[k + 1]];
    for (int d = 0; d < 3; d++)
    {
      j[d][k] = xk[d] - x0[d];
    }
  }
  const double c00 = j[1][1] * j[2][2] - j[1][2] * j[2][1];
  const double c01 = j[1][2] * j[2][0] - j[1][0] * j[2][2];
  const double c02 = j[1][0] * j[2][1] - j[1][1] * j[2][0];
  const double det = j[0][0] * c00 + j[0][1] * c01 + j[0][2] * c02;
  if (!(std::abs(det) > 0.0))
  {
    throw GeometryError("degenerate tetrahedron " + std::to_string(c));
  }
  e.measure = std::abs(det) / 6.0;
  const double inv[3][3] = {
      {c00 / det, (j[0][2] * j[2][1] - j[0][1] * j[2][2]) / det,
       (j[0][1] * j[1][2] - j[0][2] * j[1][1]) / det},
      {c01 / det, (j[0][0] * j[2][2] - j[0][2] * j[2][0]) / det,
       (j[0][2] * j[1][0] - j[0][0] * j[1][2]) / det},
      {c02 / det, (j[0][1] * j[2][0] - j[0][0] * j[2][1]) / det,
       (j[0][0] * j[1][1] - j[0][1] * j[1][0]) / det}};
  for (int k = 0; k < 3; k++)
  {
    e.grad[k + 1] = {inv[k][0], inv[k][1], inv[k][2]};
  }
  for (int d = 0; d < 3; d++)
  {
    e.grad[0][d] = -(e.grad[1][d] + e.grad[2][d] + e.grad[3][d]);
  }
  return e;
}

Vec3 element_integral(const Element &e, std::span<const Vec3> w)
{
  Vec3 s = {0.0, 0.0, 0.0};
  for (int a = 0; a < e.n; a++)
  {
    for (int d = 0; d < 3; d++)
    {
      s[d] += w[e.v[a]][d];
    }
  }
  const double f = e.measure / e.n;
  return {f * s[0], f * s[1], f * s[2]};
}

Mat3 element_advection_tensor(const Element &e, std::span<const Vec3> w)
{
  Mat3 m{};
  Vec3 s = {0.0, 0.0, 0.0};
  for (int a = 0; a < e.n; a++)
  {
    const auto &wa = w[e.v[a]];
    for (int i = 0; i < 3; i++)
    {
      s[i] += wa[i];
      for (int j = 0; j < 3; j++)
      {
        m[i][j] += wa[i] * wa[j];
      }
    }
  }
  const double f = e.measure / ((e.dim + 1) * (e.dim + 2));
  for (int i = 0; i < 3; i++)
  {
    for (int j = 0; j < 3; j++)
    {
      m[i][j] = f * (m[i][j] + s[i] * s[j]);
    }
  }
  return m;
}

std::array<Vec3, 4> element_weighted_flow(const Element &e, std::span<const Vec3> w)
{
  Vec3 s = {0.0, 0.0, 0.0};
  for (int a = 0; a < e.n; a++)
  {
    for (int d = 0; d < 3; d++)
    {
      s[d] += w[e.v[a]][d];
    }
  }
  const double f = e.measure / ((e.dim + 1) * (e.dim + 2));
  std::array<Vec3, 4> n{};
  for (int a = 0; a < e.n; a++)
  {
    for (int d = 0; d < 3; d++)
    {
      n[a][d] = f * (w[e.v[a]][d] + s[d]);
    }
  }
  return n;
}

Vec3 element_gradient(const Element &e, std::span<const double> u)
{
  Vec3 g = {0.0, 0.0, 0.0};
  for (int a = 0; a < e.n; a++)
  {
    const double ua = u[e.v[a]];
    for (int d = 0; d < 3; d++)
    {
      g[d] += ua * e.grad[a][d];
    }
  }
  return g;
}

}  // namespace perfohom
