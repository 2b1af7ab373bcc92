// Copyright 2026 The perfohom Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PERFOHOM_CELL_PROBLEMS_HPP
#define PERFOHOM_CELL_PROBLEMS_HPP

#include <array>
#include <vector>

#include "perfohom/fem.hpp"
#include "perfohom/mesh.hpp"

namespace perfohom
{

//
// Flow-modified cell operator
//   a(p, q) = 1/|Xi| int_{Y*} grad p . grad q - tau/c^2 (w.grad p)(w.grad q)
// in node numbering (periodicity is applied by the solver).
// Throws MachBoundError when tau |w|^2 >= c^2 at some node.
//
Eigen::SparseMatrix<double> assemble_Aw(const Mesh &mesh, const FlowField &flow,
                                        const FluidProperties &props, double xi_area,
                                        Exec exec = Exec::parallel);

// Bilinear form a(p, q) evaluated element by element, independent of the matrix.
double cell_form(const Mesh &mesh, const FlowField &flow, const FluidProperties &props,
                 double xi_area, std::span<const double> p, std::span<const double> q);

// Right-hand sides of the corrector problems (node numbering).
Eigen::VectorXd rhs_pi_beta(const Eigen::SparseMatrix<double> &aw, const Mesh &mesh, int beta);
Eigen::VectorXd rhs_xi(const Mesh &mesh, double xi_area);
Eigen::VectorXd rhs_pi_P(const Mesh &mesh, const FlowField &flow, const FluidProperties &props,
                         double xi_area);

struct CellSolutionSet
{
  std::array<std::vector<double>, 2> pi_beta;
  std::vector<double> xi;
  std::vector<double> pi_P;
  double xi_area = 1.0;
  // |1^T b| / sum |b| of each reduced load: pi^1, pi^2, xi, pi^P.
  std::array<double, 4> compatibility{};
  std::array<double, 4> residual{};
};

//
// Factors A_w once (zero-mean, periodic) and solves the four corrector
// problems pi^1, pi^2, xi, pi^P.
//
class CellProblems
{
public:
  CellProblems(const Mesh &mesh, const FlowField &flow, const FluidProperties &props,
               double xi_area, Exec exec = Exec::parallel, SolveOptions opts = {});

  std::vector<double> solve_pi_beta(int beta) const;
  std::vector<double> solve_xi() const;
  std::vector<double> solve_pi_P() const;
  CellSolutionSet solve_all() const;

  const Eigen::SparseMatrix<double> &operator_matrix() const { return aw_; }
  const DofMap &dofs() const { return solver_.dofs(); }

private:
  std::vector<double> run(const Eigen::VectorXd &rhs, double *compat, double *res) const;

  const Mesh &mesh_;
  const FlowField &flow_;
  FluidProperties props_;
  double xi_area_;
  Eigen::SparseMatrix<double> aw_;
  ConstrainedSolver<double> solver_;
};

}  // namespace perfohom

#endif  // PERFOHOM_CELL_PROBLEMS_HPP
