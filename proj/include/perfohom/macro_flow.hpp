// Copyright 2026 The perfohom Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PERFOHOM_MACRO_FLOW_HPP
#define PERFOHOM_MACRO_FLOW_HPP

#include <ostream>
#include <vector>

#include "perfohom/fem.hpp"
#include "perfohom/mesh.hpp"

namespace perfohom
{

//
// Steady flow in the waveguide section. Velocities use the section
// components (w1, w3) in slots 0 and 1; U3 is the transverse speed through
// Gamma0, positive from the inlet side towards the outlet side.
//
struct MacroFlowField
{
  FlowField flow;
  double U_in = 0.0;
  WaveguideTopology topology;
  std::vector<double> U3_nodes;     // per interface node
  std::vector<double> U3_elements;  // per interface segment (mean of its two nodes)
  double inlet_flux = 0.0;   // inflow through the inlet
  double outlet_flux = 0.0;  // outflow through the outlet
};

//
// Laplace problem for Psi with d_n Psi = U_in on the inlet, -U_in on the
// outlet and zero on the walls; Gamma0 is transparent (both traces share one
// unknown). w = -grad Psi.
//
MacroFlowField solve_macro_potential_flow(const Mesh &mesh, double U_in,
                                          const FluidProperties &props = {},
                                          Exec exec = Exec::parallel, SolveOptions opts = {});

// Constant axial (x3) velocity everywhere.
MacroFlowField uniform_macro_flow(const Mesh &mesh, double axial_speed,
                                  const FluidProperties &props = {});

// Mean upward flux (1/dz) int w3 over the cells between the grid lines
// x3 = z_lo and x3 = z_hi. Equals the inlet flux to solver accuracy because
// the ramp between the two lines is a P1 test function.
double section_flux(const Mesh &mesh, const MacroFlowField &f, double z_lo, double z_hi);

// "arc_length,x1,U3" per interface node.
void write_interface_profile_csv(std::ostream &out, const MacroFlowField &f);

}  // namespace perfohom

#endif  // PERFOHOM_MACRO_FLOW_HPP
