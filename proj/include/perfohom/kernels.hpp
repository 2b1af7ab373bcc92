// Copyright 2026 The perfohom Authors
// SPDX-License-Identifier: Apache-2.0

// Element-level P1 quantities shared by assembly, post-processing and tests.

#ifndef PERFOHOM_KERNELS_HPP
#define PERFOHOM_KERNELS_HPP

#include <array>
#include <span>
#include <vector>

#include "perfohom/mesh.hpp"

namespace perfohom
{

using Mat3 = std::array<std::array<double, 3>, 3>;

struct Element
{
  int n = 0;  // vertices
  int dim = 0;
  double measure = 0.0;
  std::array<int, 4> v{};
  std::array<Vec3, 4> grad{};  // gradients of the barycentric basis functions
};

// Throws GeometryError for degenerate cells.
Element make_element(const Mesh &mesh, std::size_t c);

inline double dot(const Vec3 &a, const Vec3 &b)
{
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

// Integral of phi_a phi_b over a simplex of dimension d and measure m.
inline double simplex_mass(int d, double m, int a, int b)
{
  return m * (a == b ? 2.0 : 1.0) / ((d + 1) * (d + 2));
}

// Integral over the element of the nodal vector field w (exact for P1).
Vec3 element_integral(const Element &e, std::span<const Vec3> w);

// Exact integral of w (x) w for a nodal P1 field w.
Mat3 element_advection_tensor(const Element &e, std::span<const Vec3> w);

// Exact integral of phi_i w for each vertex i.
std::array<Vec3, 4> element_weighted_flow(const Element &e, std::span<const Vec3> w);

// Gradient of a nodal field on the element.
Vec3 element_gradient(const Element &e, std::span<const double> u);

inline Vec3 mat_vec(const Mat3 &m, const Vec3 &x)
{
  return {m[0][0] * x[0] + m[0][1] * x[1] + m[0][2] * x[2],
          m[1][0] * x[0] + m[1][1] * x[1] + m[1][2] * x[2],
          m[2][0] * x[0] + m[2][1] * x[1] + m[2][2] * x[2]};
}

}  // namespace perfohom

#endif  // PERFOHOM_KERNELS_HPP
