// Copyright 2026 The perfohom Authors
// SPDX-License-Identifier: Apache-2.0

#include "perfohom/cell_flow.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "perfohom/errors.hpp"
#include "perfohom/kernels.hpp"

namespace perfohom
{

namespace
{

FormSpec flow_form(double U3)
{
  // d_n Phi = -w.n: -U3 on I+, +U3 on I-.
  FormSpec spec;
  spec.add(TermKind::grad_grad)
      .add(TermKind::boundary_load, -U3, groups::kTop)
      .add(TermKind::boundary_load, U3, groups::kBottom);
  return spec;
}

void require_cell_groups(const Mesh &mesh)
{
  if (mesh.dim != 3)
  {
    throw InvalidArgument("cell flow needs a tetrahedral cell mesh");
  }
  for (const char *g : {groups::kTop, groups::kBottom, groups::kSolidWall})
  {
    if (!mesh.has_group(g))
    {
      throw InvalidArgument(std::string("cell mesh lacks facet group '") + g + "'");
    }
  }
  if (mesh.periodic_pairs.empty())
  {
    throw InvalidArgument("cell mesh has no periodic pairing");
  }
}

}  // namespace

FlowField solve_cell_potential_flow(const Mesh &mesh, double U3, const FluidProperties &props,
                                    Exec exec, SolveOptions opts)
{
  if (!std::isfinite(U3))
  {
    throw InvalidArgument("U3 must be finite");
  }
  require_cell_groups(mesh);
  const RealSystem sys = assemble_real(mesh, flow_form(U3), nullptr, exec);
  const DofMap dofs = DofMap::periodic(mesh);
  ConstrainedSolver<double> solver(mesh, sys.matrix, dofs, Constraint::zero_mean_constraint(),
                                   opts);
  // Opposite fluxes over |I+| = |I-| make the load compatible by construction.
  const Eigen::VectorXd phi = solver.solve(sys.rhs);

  FlowField flow;
  flow.potential.assign(phi.data(), phi.data() + phi.size());
  flow.w = recover_nodal_gradient(mesh, flow.potential, dofs);
  for (auto &v : flow.w)
  {
    for (auto &c : v)
    {
      c = -c;
    }
  }
  flow.update_mach(props);
  return flow;
}

FlowField uniform_flow(const Mesh &mesh, const Vec3 &w, const FluidProperties &props)
{
  for (double c : w)
  {
    if (!std::isfinite(c))
    {
      throw InvalidArgument("flow vector must be finite");
    }
  }
  FlowField flow;
  flow.w.assign(mesh.num_nodes(), w);
  flow.potential.resize(mesh.num_nodes());
  for (std::size_t i = 0; i < mesh.num_nodes(); i++)
  {
    flow.potential[i] = -dot(w, mesh.nodes[i]);
  }
  flow.update_mach(props);
  return flow;
}

CellFlowDiagnostics diagnose_cell_flow(const Mesh &mesh, const FlowField &flow, double U3,
                                       double xi_area)
{
  require_cell_groups(mesh);
  if (flow.potential.size() != mesh.num_nodes())
  {
    throw InvalidArgument("flow potential does not match the mesh");
  }
  CellFlowDiagnostics d;
  const double ref = std::abs(U3) * xi_area;

  // Layer fluxes (1/dz) int_layer w3: the z-ramp test function makes this exact.
  std::set<double> zs;
  for (const auto &p : mesh.nodes)
  {
    zs.insert(p[2]);
  }
  std::vector<double> planes(zs.begin(), zs.end());
  std::map<std::size_t, double> layer;
  for (std::size_t c = 0; c < mesh.num_cells(); c++)
  {
    const Element e = make_element(mesh, c);
    double lo = 1e300, hi = -1e300;
    for (int a = 0; a < e.n; a++)
    {
      lo = std::min(lo, mesh.nodes[e.v[a]][2]);
      hi = std::max(hi, mesh.nodes[e.v[a]][2]);
    }
    const auto k = static_cast<std::size_t>(
        std::lower_bound(planes.begin(), planes.end(), lo) - planes.begin());
    if (k + 1 >= planes.size() || planes[k + 1] != hi)
    {
      throw GeometryError("cell mesh is not layered in z");
    }
    const Vec3 g = element_gradient(e, flow.potential);
    layer[k] += -e.measure * g[2] / (hi - lo);
  }
  for (const auto &[k, f] : layer)
  {
    const double defect = std::abs(f - U3 * xi_area);
    d.max_layer_defect = std::max(d.max_layer_defect, ref > 0.0 ? defect / ref : defect);
  }
  if (!layer.empty())
  {
    d.flux_top = layer.rbegin()->second;
    d.flux_bottom = -layer.begin()->second;
  }

  // Consistent boundary fluxes from the discrete residual.
  const RealSystem sys = assemble_real(mesh, flow_form(U3), nullptr, Exec::serial);
  const DofMap dofs = DofMap::periodic(mesh);
  const Eigen::Map<const Eigen::VectorXd> phi(flow.potential.data(), flow.potential.size());
  const Eigen::VectorXd kphi = dofs.restrict(Eigen::VectorXd(sys.matrix * phi));
  const Eigen::VectorXd b = dofs.restrict(sys.rhs);
  const Eigen::VectorXd r = kphi - b;
  const double bn = b.norm();
  d.residual = bn > 0.0 ? r.norm() / bn : r.norm();

  std::vector<char> port(dofs.num_dofs(), 0), wall(dofs.num_dofs(), 0);
  for (const char *g : {groups::kTop, groups::kBottom})
  {
    for (int n : mesh.group(g))
    {
      port[dofs[n]] = 1;
    }
  }
  for (int n : mesh.group(groups::kSolidWall))
  {
    wall[dofs[n]] = 1;
  }
  double wall_flux = 0.0;
  for (std::size_t k = 0; k < dofs.num_dofs(); k++)
  {
    if (wall[k] && !port[k])
    {
      wall_flux += kphi[k];
    }
  }
  d.wall_flux = ref > 0.0 ? std::abs(wall_flux) / ref : std::abs(wall_flux);
  return d;
}

}  // namespace perfohom
