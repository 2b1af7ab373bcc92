// Copyright 2026 The perfohom Authors
// SPDX-License-Identifier: Apache-2.0

#include "perfohom/macro_flow.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "perfohom/errors.hpp"
#include "perfohom/kernels.hpp"

namespace perfohom
{

namespace
{

void fill_profile(MacroFlowField &f)
{
  const auto &t = f.topology;
  f.U3_nodes.resize(t.minus_nodes.size());
  for (std::size_t i = 0; i < t.minus_nodes.size(); i++)
  {
    f.U3_nodes[i] = 0.5 * (f.flow.w[t.minus_nodes[i]][1] + f.flow.w[t.plus_nodes[i]][1]);
  }
  f.U3_elements.resize(f.U3_nodes.size() - 1);
  for (std::size_t e = 0; e + 1 < f.U3_nodes.size(); e++)
  {
    f.U3_elements[e] = 0.5 * (f.U3_nodes[e] + f.U3_nodes[e + 1]);
  }
}

double port_flux(const Mesh &mesh, const FlowField &flow, const std::string &name, double sign)
{
  // Facets are oriented with the domain on the left, so the outward normal
  // of edge (a, b) is (dy, -dx) / |edge|.
  const auto &g = mesh.group(name);
  double flux = 0.0;
  for (std::size_t k = 0; k + 1 < g.size(); k += 2)
  {
    const Vec3 &a = mesh.nodes[g[k]], &b = mesh.nodes[g[k + 1]];
    const double nx = b[1] - a[1], ny = -(b[0] - a[0]);
    const Vec3 &wa = flow.w[g[k]], &wb = flow.w[g[k + 1]];
    flux += 0.5 * ((wa[0] + wb[0]) * nx + (wa[1] + wb[1]) * ny);
  }
  return sign * flux;
}

}  // namespace

MacroFlowField solve_macro_potential_flow(const Mesh &mesh, double U_in,
                                          const FluidProperties &props, Exec exec,
                                          SolveOptions opts)
{
  if (!std::isfinite(U_in))
  {
    throw InvalidArgument("U_in must be finite");
  }
  MacroFlowField f;
  f.U_in = U_in;
  f.topology = analyze_waveguide(mesh);

  // Both traces of Gamma0 share one unknown.
  Mesh merged = mesh;
  merged.periodic_pairs.clear();
  for (std::size_t i = 0; i < f.topology.minus_nodes.size(); i++)
  {
    merged.periodic_pairs.push_back({f.topology.minus_nodes[i], f.topology.plus_nodes[i], 3});
  }
  const DofMap dofs = DofMap::periodic(merged);

  FormSpec spec;
  spec.add(TermKind::grad_grad)
      .add(TermKind::boundary_load, U_in, groups::kInlet)
      .add(TermKind::boundary_load, -U_in, groups::kOutlet);
  const RealSystem sys = assemble_real(mesh, spec, nullptr, exec);
  const double lin = group_measure(mesh, groups::kInlet);
  const double lout = group_measure(mesh, groups::kOutlet);
  if (std::abs(lin - lout) > 1e-10 * std::max(lin, lout))
  {
    std::ostringstream msg;
    msg << "inlet and outlet fluxes do not balance: |inlet| = " << lin << ", |outlet| = " << lout;
    throw CompatibilityError(msg.str(), std::abs(lin - lout) / std::max(lin, lout));
  }
  ConstrainedSolver<double> solver(merged, sys.matrix, dofs, Constraint::zero_mean_constraint(),
                                   opts);
  const Eigen::VectorXd psi = solver.solve(sys.rhs);

  f.flow.potential.assign(psi.data(), psi.data() + psi.size());
  f.flow.w = recover_nodal_gradient(mesh, f.flow.potential, dofs);
  for (auto &v : f.flow.w)
  {
    for (auto &c : v)
    {
      c = -c;
    }
  }
  f.flow.update_mach(props);
  f.inlet_flux = port_flux(mesh, f.flow, groups::kInlet, -1.0);
  f.outlet_flux = port_flux(mesh, f.flow, groups::kOutlet, 1.0);
  fill_profile(f);
  return f;
}

MacroFlowField uniform_macro_flow(const Mesh &mesh, double axial_speed,
                                  const FluidProperties &props)
{
  if (!std::isfinite(axial_speed))
  {
    throw InvalidArgument("axial speed must be finite");
  }
  MacroFlowField f;
  f.U_in = axial_speed;
  f.topology = analyze_waveguide(mesh);
  f.flow.w.assign(mesh.num_nodes(), Vec3{0.0, axial_speed, 0.0});
  f.flow.potential.resize(mesh.num_nodes());
  for (std::size_t i = 0; i < mesh.num_nodes(); i++)
  {
    f.flow.potential[i] = -axial_speed * mesh.nodes[i][1];
  }
  f.flow.update_mach(props);
  f.inlet_flux = port_flux(mesh, f.flow, groups::kInlet, -1.0);
  f.outlet_flux = port_flux(mesh, f.flow, groups::kOutlet, 1.0);
  fill_profile(f);
  return f;
}

double section_flux(const Mesh &mesh, const MacroFlowField &f, double z_lo, double z_hi)
{
  if (!(z_hi > z_lo))
  {
    throw InvalidArgument("section needs z_lo < z_hi");
  }
  double sum = 0.0;
  bool any = false;
  for (std::size_t c = 0; c < mesh.num_cells(); c++)
  {
    const Element e = make_element(mesh, c);
    bool inside = true;
    for (int a = 0; a < e.n; a++)
    {
      const double z = mesh.nodes[e.v[a]][1];
      inside = inside && z >= z_lo && z <= z_hi;
    }
    if (inside)
    {
      any = true;
      sum -= e.measure * element_gradient(e, f.flow.potential)[1];
    }
  }
  if (!any)
  {
    throw InvalidArgument("no cells between the section lines");
  }
  return sum / (z_hi - z_lo);
}

void write_interface_profile_csv(std::ostream &out, const MacroFlowField &f)
{
  out << "arc_length,x1,U3\n";
  out.precision(17);
  const auto &x = f.topology.x1;
  for (std::size_t i = 0; i < f.U3_nodes.size(); i++)
  {
    out << x[i] - x.front() << ',' << x[i] << ',' << f.U3_nodes[i] << '\n';
  }
}

}  // namespace perfohom
