// Copyright 2026 The perfohom Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PERFOHOM_CELL_FLOW_HPP
#define PERFOHOM_CELL_FLOW_HPP

#include "perfohom/fem.hpp"
#include "perfohom/mesh.hpp"

namespace perfohom
{

//
// Periodic potential flow through the cell: w.n = +U3 on I+ and -U3 on I-,
// impermeable solid walls, zero-mean potential, w = -grad Phi recovered at the
// nodes. The Mach bound is only flagged here.
//
FlowField solve_cell_potential_flow(const Mesh &mesh, double U3, const FluidProperties &props = {},
                                    Exec exec = Exec::parallel, SolveOptions opts = {});

// Constant nodal field; the potential is -w.x.
FlowField uniform_flow(const Mesh &mesh, const Vec3 &w, const FluidProperties &props = {});

struct CellFlowDiagnostics
{
  double flux_top = 0.0;     // outward flux through I+
  double flux_bottom = 0.0;  // outward flux through I-
  double max_layer_defect = 0.0;  // max over z-layers of |layer flux - U3 |Xi|| / (U3 |Xi|)
  double wall_flux = 0.0;    // consistent normal flux through the solid wall, relative to U3 |Xi|
  double residual = 0.0;     // relative residual of the discrete Laplace problem
};

// Conservation checks computed from cell gradients of the potential, which
// satisfy the discrete balance exactly (nodal w is only a recovery).
CellFlowDiagnostics diagnose_cell_flow(const Mesh &mesh, const FlowField &flow, double U3,
                                       double xi_area);

}  // namespace perfohom

#endif  // PERFOHOM_CELL_FLOW_HPP
