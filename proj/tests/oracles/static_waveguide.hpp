// Copyright 2026 The perfohom Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PERFOHOM_TESTS_STATIC_WAVEGUIDE_HPP
#define PERFOHOM_TESTS_STATIC_WAVEGUIDE_HPP

#include <vector>

#include <Eigen/Sparse>

#include "perfohom/coefficients.hpp"
#include "perfohom/mesh.hpp"

namespace oracle
{

// Static interface data of one Gamma0 segment.
struct StaticLayer
{
  double A11 = 1.0;
  double B1 = 0.0;
  double Bp1 = 0.0;
  double F = 1.0;
  double mass = 1.0;  // zeta* kappa
};

std::vector<StaticLayer> static_layers(const std::vector<perfohom::HomogenizedCoefficients> &k);

struct StaticSetup
{
  double c = 343.0;
  double eps0 = 0.025;
  double p_incident = 300.0;
};

//
// Plain Helmholtz in both subdomains coupled through the static layer model,
// written directly in (P, G+, G-) with its own element integrals. Unknown
// and row order: mesh nodes, then G+ and G- per interface node by x1.
//
struct StaticSystem
{
  Eigen::SparseMatrix<std::complex<double>> matrix;
  Eigen::VectorXcd rhs;
};

StaticSystem assemble_static(const perfohom::Mesh &mesh, const std::vector<StaticLayer> &layers,
                             const StaticSetup &setup, double omega);

Eigen::VectorXcd solve_static(const perfohom::Mesh &mesh, const std::vector<StaticLayer> &layers,
                              const StaticSetup &setup, double omega);

// Helmholtz with the two Gamma0 traces glued (no layer at all).
Eigen::VectorXcd solve_glued(const perfohom::Mesh &mesh, const StaticSetup &setup, double omega);

// 10 log10(int_out |P|^2 / int_in |P|^2) with two-point Gauss quadrature.
double tl_db(const perfohom::Mesh &mesh, const Eigen::VectorXcd &P);

}  // namespace oracle

#endif  // PERFOHOM_TESTS_STATIC_WAVEGUIDE_HPP
