// Copyright 2026 The perfohom Authors
// SPDX-License-Identifier: Apache-2.0

#include "perfohom/cell_problems.hpp"

#include <cmath>

#include "perfohom/errors.hpp"
#include "perfohom/kernels.hpp"

namespace perfohom
{

namespace
{

void check_flow(const Mesh &mesh, const FlowField &flow, const FluidProperties &props)
{
  props.validate();
  if (flow.w.size() != mesh.num_nodes())
  {
    throw InvalidArgument("flow field does not match the cell mesh");
  }
  double m2 = 0.0;
  for (const auto &v : flow.w)
  {
    m2 = std::max(m2, dot(v, v));
  }
  if (props.tau * m2 >= props.c * props.c)
  {
    throw MachBoundError(std::sqrt(m2), props.mach_speed_bound());
  }
}

}  // namespace

Eigen::SparseMatrix<double> assemble_Aw(const Mesh &mesh, const FlowField &flow,
                                        const FluidProperties &props, double xi_area, Exec exec)
{
  check_flow(mesh, flow, props);
  if (!(xi_area > 0.0))
  {
    throw InvalidArgument("|Xi| must be positive");
  }
  FormSpec spec;
  spec.add(TermKind::grad_grad, 1.0 / xi_area)
      .add(TermKind::adv_adv, -props.tau / (props.c * props.c * xi_area));
  return assemble_real(mesh, spec, &flow, exec).matrix;
}

double cell_form(const Mesh &mesh, const FlowField &flow, const FluidProperties &props,
                 double xi_area, std::span<const double> p, std::span<const double> q)
{
  const double s = props.tau / (props.c * props.c);
  double sum = 0.0;
  for (std::size_t c = 0; c < mesh.num_cells(); c++)
  {
    const Element e = make_element(mesh, c);
    const Vec3 gp = element_gradient(e, p), gq = element_gradient(e, q);
    const Mat3 m = element_advection_tensor(e, flow.w);
    sum += e.measure * dot(gp, gq) - s * dot(mat_vec(m, gp), gq);
  }
  return sum / xi_area;
}

Eigen::VectorXd rhs_pi_beta(const Eigen::SparseMatrix<double> &aw, const Mesh &mesh, int beta)
{
  if (beta != 1 && beta != 2)
  {
    throw InvalidArgument("beta must be 1 or 2");
  }
  // -a(y_beta, q): y_beta is P1-exact, so apply the unreduced operator to its nodal values.
  Eigen::VectorXd y(mesh.num_nodes());
  for (std::size_t i = 0; i < mesh.num_nodes(); i++)
  {
    y[i] = mesh.nodes[i][beta - 1];
  }
  return -(aw * y);
}

Eigen::VectorXd rhs_xi(const Mesh &mesh, double xi_area)
{
  FormSpec spec;
  spec.add(TermKind::boundary_load, -1.0 / xi_area, groups::kTop)
      .add(TermKind::boundary_load, 1.0 / xi_area, groups::kBottom);
  return assemble_real(mesh, spec, nullptr, Exec::serial).rhs;
}

Eigen::VectorXd rhs_pi_P(const Mesh &mesh, const FlowField &flow, const FluidProperties &props,
                         double xi_area)
{
  FormSpec spec;
  spec.add(TermKind::advection_load, props.theta() / (props.c * props.c * xi_area));
  return assemble_real(mesh, spec, &flow, Exec::serial).rhs;
}

CellProblems::CellProblems(const Mesh &mesh, const FlowField &flow, const FluidProperties &props,
                           double xi_area, Exec exec, SolveOptions opts)
  : mesh_(mesh), flow_(flow), props_(props), xi_area_(xi_area),
    aw_(assemble_Aw(mesh, flow, props, xi_area, exec)),
    solver_(mesh, aw_, DofMap::periodic(mesh), Constraint::zero_mean_constraint(), opts)
{
}

std::vector<double> CellProblems::run(const Eigen::VectorXd &rhs, double *compat,
                                      double *res) const
{
  if (compat)
  {
    *compat = solver_.compatibility_defect(rhs);
  }
  const Eigen::VectorXd x = solver_.solve(rhs, res);
  return {x.data(), x.data() + x.size()};
}

std::vector<double> CellProblems::solve_pi_beta(int beta) const
{
  return run(rhs_pi_beta(aw_, mesh_, beta), nullptr, nullptr);
}

std::vector<double> CellProblems::solve_xi() const
{
  return run(rhs_xi(mesh_, xi_area_), nullptr, nullptr);
}

std::vector<double> CellProblems::solve_pi_P() const
{
  return run(rhs_pi_P(mesh_, flow_, props_, xi_area_), nullptr, nullptr);
}

CellSolutionSet CellProblems::solve_all() const
{
  CellSolutionSet s;
  s.xi_area = xi_area_;
  for (int b = 1; b <= 2; b++)
  {
    s.pi_beta[b - 1] =
        run(rhs_pi_beta(aw_, mesh_, b), &s.compatibility[b - 1], &s.residual[b - 1]);
  }
  s.xi = run(rhs_xi(mesh_, xi_area_), &s.compatibility[2], &s.residual[2]);
  s.pi_P = run(rhs_pi_P(mesh_, flow_, props_, xi_area_), &s.compatibility[3], &s.residual[3]);
  return s;
}

}  // namespace perfohom
