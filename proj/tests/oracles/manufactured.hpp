// Copyright 2026 The perfohom Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PERFOHOM_TESTS_MANUFACTURED_HPP
#define PERFOHOM_TESTS_MANUFACTURED_HPP

#include <array>
#include <vector>

namespace oracle
{

//
// L2 errors of P1 solutions against closed-form fields on the unit square
// with an n x n grid. Loads and errors use a degree-5 triangle rule.
//
// -Delta u = f, pure Neumann, zero mean; u = cos(pi x) cos(pi y).
double laplace_neumann_error(int n);

//
// -c^2 Delta u - omega^2 u + 2 i omega theta w.grad u + tau (w.grad)^2 u = f
// with homogeneous Dirichlet data, u = sin(pi x) sin(pi y) (1 + x y / 2),
// constant w.
//
struct HelmholtzCase
{
  double c = 1.0;
  double omega = 2.0;
  double theta = 2.0;
  double tau = 3.0;
  std::array<double, 2> w = {0.3, -0.2};
};
double helmholtz_error(int n, const HelmholtzCase &hc = {});

// Observed orders log2(e_k / e_{k+1}) of a sequence of halved mesh sizes.
std::vector<double> observed_orders(const std::vector<double> &errors);

}  // namespace oracle

#endif  // PERFOHOM_TESTS_MANUFACTURED_HPP
