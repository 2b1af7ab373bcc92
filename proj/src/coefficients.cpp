// Copyright 2026 The perfohom Authors
// SPDX-License-Identifier: Apache-2.0

#include "perfohom/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <omp.h>

#include "perfohom/cell_flow.hpp"
#include "perfohom/errors.hpp"
#include "perfohom/kernels.hpp"

namespace perfohom
{

HomogenizedCoefficients compute_coefficients(const Mesh &mesh, const FlowField &flow,
                                             const CellSolutionSet &sols,
                                             const FluidProperties &props, double kappa)
{
  const std::size_t nn = mesh.num_nodes();
  if (flow.w.size() != nn || sols.xi.size() != nn || sols.pi_P.size() != nn ||
      sols.pi_beta[0].size() != nn || sols.pi_beta[1].size() != nn)
  {
    throw InvalidArgument("cell solutions do not match the mesh");
  }
  const double xa = sols.xi_area;
  const double c2 = props.c * props.c;
  const double s = props.tau / c2;
  const double theta = props.theta();

  HomogenizedCoefficients k;
  double a_piP[2] = {0.0, 0.0};      // a(pi^b, pi^P) before normalisation
  double avg_w[2] = {0.0, 0.0};      // int w_b
  double avg_dP[2] = {0.0, 0.0};     // int d_b pi^P
  double avg_wPw[2] = {0.0, 0.0};    // int (w.grad pi^P) w_b
  double volume = 0.0;
  for (std::size_t c = 0; c < mesh.num_cells(); c++)
  {
    const Element e = make_element(mesh, c);
    volume += e.measure;
    const Mat3 m = element_advection_tensor(e, flow.w);
    const Vec3 wt = element_integral(e, flow.w);
    std::array<Vec3, 2> gp, g;
    for (int b = 0; b < 2; b++)
    {
      gp[b] = element_gradient(e, sols.pi_beta[b]);
      g[b] = gp[b];
      g[b][b] += 1.0;
    }
    const Vec3 gx = element_gradient(e, sols.xi);
    const Vec3 gP = element_gradient(e, sols.pi_P);
    // D = |T| I - (tau/c^2) int_T w (x) w
    auto apply_d = [&](const Vec3 &v)
    {
      const Vec3 mv = mat_vec(m, v);
      return Vec3{e.measure * v[0] - s * mv[0], e.measure * v[1] - s * mv[1],
                  e.measure * v[2] - s * mv[2]};
    };
    const Vec3 dx = apply_d(gx), dP = apply_d(gP);
    const Vec3 mP = mat_vec(m, gP);
    for (int a = 0; a < 2; a++)
    {
      const Vec3 da = apply_d(g[a]);
      for (int b = 0; b < 2; b++)
      {
        k.A[a][b] += dot(da, g[b]);
      }
      k.B[a] += dx[a];
      k.Wbar[a] += dot(wt, g[a]);
      a_piP[a] += dot(gp[a], dP);
      avg_w[a] += wt[a];
      avg_dP[a] += e.measure * gP[a];
      avg_wPw[a] += mP[a];
    }
    k.Mw += theta * dot(wt, gP);
    k.Tw += dot(wt, gx);
  }
  for (int a = 0; a < 2; a++)
  {
    for (int b = 0; b < 2; b++)
    {
      k.A[a][b] /= xa;
    }
    k.B[a] /= xa;
    k.Wbar[a] /= xa;
    const double aw = avg_w[a] / xa;
    k.Wbarp[a] = -(c2 / theta) * (a_piP[a] / xa) - aw;
    k.Qw[a] = c2 * avg_dP[a] / xa - theta * aw - props.tau * avg_wPw[a] / xa;
  }
  k.Mw /= xa;
  k.Tw /= xa;

  auto jump = [&](std::span<const double> u)
  {
    return (integrate(mesh, Region::facets(groups::kTop), u) -
            integrate(mesh, Region::facets(groups::kBottom), u)) /
           xa;
  };
  k.Bp[0] = jump(sols.pi_beta[0]);
  k.Bp[1] = jump(sols.pi_beta[1]);
  k.F = -jump(sols.xi);
  k.Twp = jump(sols.pi_P);
  k.kappa = kappa;
  k.zeta_star = volume / (xa * kappa);
  k.max_speed = flow.max_speed;
  std::ostringstream id;
  id << "tet" << mesh.num_cells() << "-n" << mesh.num_nodes();
  k.mesh_id = id.str();
  return k;
}

bool SymmetryReport::all_pass() const
{
  return std::all_of(checks.begin(), checks.end(), [](const auto &c) { return c.pass; });
}

double SymmetryReport::max_structural_defect() const
{
  double d = 0.0;
  for (const auto &c : checks)
  {
    if (c.name != "Qw=theta*Wbar'")
    {
      d = std::max(d, c.defect);
    }
  }
  return d;
}

const SymmetryCheck &SymmetryReport::get(const std::string &name) const
{
  for (const auto &c : checks)
  {
    if (c.name == name)
    {
      return c;
    }
  }
  throw InvalidArgument("no symmetry check named '" + name + "'");
}

namespace
{

double rel_defect(double x, double y, double floor)
{
  const double scale = std::max({std::abs(x), std::abs(y), floor});
  const double diff = std::abs(x - y);
  return scale > 0.0 ? diff / scale : diff;
}

}  // namespace

SymmetryReport verify_symmetries(const HomogenizedCoefficients &c, const FluidProperties &props,
                                 double tol)
{
  const double r = props.theta() / (props.c * props.c);
  const double wscale = c.max_speed * c.fluid_mass();
  SymmetryReport rep;
  auto add = [&](std::string name, double defect)
  {
    rep.checks.push_back({std::move(name), defect, defect <= tol && std::isfinite(defect)});
  };
  const double amax = std::max({std::abs(c.A[0][0]), std::abs(c.A[0][1]), std::abs(c.A[1][0]),
                                std::abs(c.A[1][1])});
  add("A=A^T", rel_defect(c.A[0][1], c.A[1][0], amax));
  add("B=B'", std::max(rel_defect(c.B[0], c.Bp[0], std::abs(c.F)),
                       rel_defect(c.B[1], c.Bp[1], std::abs(c.F))));
  add("Tw'=-(theta/c^2)Tw", rel_defect(c.Twp, -r * c.Tw, r * c.max_speed * std::abs(c.F)));
  add("Wbar'=-Wbar", std::max(rel_defect(c.Wbarp[0], -c.Wbar[0], wscale),
                              rel_defect(c.Wbarp[1], -c.Wbar[1], wscale)));
  const double th = props.theta();
  add("Qw=theta*Wbar'", std::max(rel_defect(c.Qw[0], th * c.Wbarp[0], th * wscale),
                                 rel_defect(c.Qw[1], th * c.Wbarp[1], th * wscale)));
  return rep;
}

HomogenizedCoefficients cell_coefficients(const Mesh &mesh, const CellGeometry &geom, double U3,
                                          const FluidProperties &props, CellRunOptions opts)
{
  const FlowField flow = solve_cell_potential_flow(mesh, U3, props, opts.exec, opts.solver);
  const CellProblems problems(mesh, flow, props, geom.xi_area(), opts.exec, opts.solver);
  const CellSolutionSet sols = problems.solve_all();
  HomogenizedCoefficients k = compute_coefficients(mesh, flow, sols, props, geom.kappa);
  k.U3 = U3;
  k.phi_deg = geom.hole_slope_deg;
  return k;
}

std::vector<SweepRow> sweep_coefficients(const std::vector<double> &angles_deg,
                                         const std::vector<double> &speeds,
                                         const CellGeometry &base, double resolution,
                                         const FluidProperties &props, Exec exec,
                                         SolveOptions opts)
{
  const std::size_t na = angles_deg.size(), ns = speeds.size();
  std::vector<SweepRow> rows(na * ns);
  std::vector<std::optional<Mesh>> meshes(na);
  std::vector<std::string> mesh_errors(na);
  std::vector<CellGeometry> geoms(na, base);
  for (std::size_t i = 0; i < na; i++)
  {
    geoms[i].hole_slope_deg = angles_deg[i];
    try
    {
      meshes[i] = generate_unit_cell_mesh(geoms[i], resolution);
    }
    catch (const std::exception &ex)
    {
      mesh_errors[i] = ex.what();
    }
  }
  auto task = [&](std::size_t t)
  {
    const std::size_t i = t / ns, j = t % ns;
    SweepRow &row = rows[t];
    row.phi_deg = angles_deg[i];
    row.U3 = speeds[j];
    if (!meshes[i])
    {
      row.error = "mesh: " + mesh_errors[i];
      return;
    }
    try
    {
      row.coeffs = cell_coefficients(*meshes[i], geoms[i], speeds[j], props, {Exec::serial, opts});
      row.defect_M3 = verify_symmetries(*row.coeffs, props).max_structural_defect();
    }
    catch (const std::exception &ex)
    {
      row.error = ex.what();
    }
  };
  const std::int64_t n = static_cast<std::int64_t>(rows.size());
  if (exec == Exec::serial)
  {
    for (std::int64_t t = 0; t < n; t++)
    {
      task(static_cast<std::size_t>(t));
    }
  }
  else
  {
#pragma omp parallel for schedule(dynamic, 1) num_threads(thread_count())
    for (std::int64_t t = 0; t < n; t++)
    {
      task(static_cast<std::size_t>(t));
    }
  }
  return rows;
}

void write_sweep_csv(std::ostream &out, const std::vector<SweepRow> &rows)
{
  out << kSweepCsvHeader << '\n';
  out.precision(17);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto &r : rows)
  {
    HomogenizedCoefficients k;
    double defect = r.defect_M3;
    if (r.coeffs)
    {
      k = *r.coeffs;
    }
    else
    {
      k.A = {Vec2{nan, nan}, Vec2{nan, nan}};
      k.B = k.Bp = k.Wbar = Vec2{nan, nan};
      k.F = k.Mw = k.Tw = k.Twp = k.zeta_star = defect = nan;
    }
    out << r.phi_deg << ',' << r.U3 << ',' << k.A[0][0] << ',' << k.A[0][1] << ',' << k.A[1][1]
        << ',' << k.B[0] << ',' << k.B[1] << ',' << k.Bp[0] << ',' << k.Bp[1] << ',' << k.F << ','
        << k.Mw << ',' << k.Tw << ',' << k.Twp << ',' << k.Wbar[0] << ',' << k.Wbar[1] << ','
        << k.zeta_star << ',' << defect << '\n';
  }
}

}  // namespace perfohom
