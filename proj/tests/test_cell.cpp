// Copyright 2026 The perfohom Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "perfohom/cell_flow.hpp"
#include "perfohom/cell_problems.hpp"
#include "perfohom/coefficients.hpp"
#include "perfohom/errors.hpp"
#include "perfohom/parallel.hpp"

using namespace perfohom;

namespace
{

CellGeometry slope(double phi)
{
  CellGeometry g;
  g.hole_slope_deg = phi;
  return g;
}

double rel(double a, double b, double scale) { return std::abs(a - b) / scale; }

}  // namespace

TEST_CASE("empty cell: identity coefficients and linear xi")
{
  for (double kappa : {1.0, 0.8})
  {
    CellGeometry g;
    g.plate_thickness = 0.0;
    g.kappa = kappa;
    const Mesh m = generate_unit_cell_mesh(g, 0.25);
    FluidProperties props;
    const FlowField flow = solve_cell_potential_flow(m, 0.0, props);
    const CellProblems pr(m, flow, props, g.xi_area());
    const CellSolutionSet s = pr.solve_all();
    const HomogenizedCoefficients k = compute_coefficients(m, flow, s, props, kappa);
    CHECK(std::abs(k.A[0][0] - kappa) <= 1e-10);
    CHECK(std::abs(k.A[1][1] - kappa) <= 1e-10);
    CHECK(std::abs(k.A[0][1]) <= 1e-10);
    CHECK(std::abs(k.F - kappa) <= 1e-10);
    CHECK(std::abs(k.B[0]) <= 1e-10);
    CHECK(std::abs(k.B[1]) <= 1e-10);
    CHECK(std::abs(k.zeta_star - 1.0) <= 1e-10);
    for (std::size_t i = 0; i < m.num_nodes(); i++)
    {
      // xi = -z (the cell is centred, so -z already has zero mean)
      CHECK(std::abs(s.xi[i] + m.nodes[i][2]) <= 1e-10);
      CHECK(std::abs(s.pi_beta[0][i]) <= 1e-10);
      CHECK(std::abs(s.pi_beta[1][i]) <= 1e-10);
    }
  }
}

TEST_CASE("empty cell with uniform through-flow: F = kappa / (1 - tau U^2 / c^2)")
{
  CellGeometry g;
  g.plate_thickness = 0.0;
  const Mesh m = generate_unit_cell_mesh(g, 0.25);
  FluidProperties props;
  const double U = 60.0;
  const FlowField flow = solve_cell_potential_flow(m, U, props);
  for (const auto &w : flow.w)
  {
    CHECK(std::abs(w[2] - U) <= 1e-9 * U);
  }
  const CellProblems pr(m, flow, props, g.xi_area());
  const HomogenizedCoefficients k = compute_coefficients(m, flow, pr.solve_all(), props, 1.0);
  const double s = props.tau * U * U / (props.c * props.c);
  CHECK(rel(k.F, 1.0 / (1.0 - s), 1.0) <= 1e-9);
  CHECK(rel(k.A[0][0], 1.0, 1.0) <= 1e-9);
}

TEST_CASE("cell flow conserves the through-flux and is linear in U3")
{
  const CellGeometry g = slope(30.0);
  const Mesh m = generate_unit_cell_mesh(g, 0.1);
  FluidProperties props;
  const FlowField f1 = solve_cell_potential_flow(m, 1.0, props);
  const FlowField f3 = solve_cell_potential_flow(m, 3.0, props);
  const CellFlowDiagnostics d = diagnose_cell_flow(m, f3, 3.0, g.xi_area());
  CHECK(d.flux_top == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(d.flux_bottom == doctest::Approx(-3.0).epsilon(1e-10));
  CHECK(d.max_layer_defect <= 1e-8);
  CHECK(std::abs(d.wall_flux) <= 1e-8);
  CHECK(d.residual <= 1e-10);
  for (std::size_t i = 0; i < m.num_nodes(); i++)
  {
    for (int c = 0; c < 3; c++)
    {
      CHECK(std::abs(f3.w[i][c] - 3.0 * f1.w[i][c]) <= 1e-9 * (1.0 + std::abs(f3.w[i][c])));
    }
  }
  const FlowField f0 = solve_cell_potential_flow(m, 0.0, props);
  CHECK(f0.max_speed == 0.0);
}

TEST_CASE("symmetry identities and the Q identity")
{
  FluidProperties props;
  for (double phi : {30.0, 60.0})
  {
    const CellGeometry g = slope(phi);
    const Mesh m = generate_unit_cell_mesh(g, 0.1);
    const HomogenizedCoefficients k = cell_coefficients(m, g, 2.5, props);
    const SymmetryReport r = verify_symmetries(k, props);
    CHECK(r.all_pass());
    CHECK(r.max_structural_defect() <= 1e-8);
    CHECK(r.get("Qw=theta*Wbar'").defect <= 1e-8);
    // The flow makes the coupling coefficients nonzero.
    CHECK(std::abs(k.Tw) > 1e-3);
    CHECK(std::abs(k.B[0]) > 1e-3);
  }
}

TEST_CASE("A from the matrix-free bilinear form")
{
  const CellGeometry g = slope(30.0);
  const Mesh m = generate_unit_cell_mesh(g, 0.15);
  FluidProperties props;
  const FlowField flow = solve_cell_potential_flow(m, 2.0, props);
  const CellProblems pr(m, flow, props, g.xi_area());
  const CellSolutionSet s = pr.solve_all();
  const HomogenizedCoefficients k = compute_coefficients(m, flow, s, props, g.kappa);
  for (int a = 0; a < 2; a++)
  {
    for (int b = 0; b < 2; b++)
    {
      std::vector<double> pa(m.num_nodes()), pb(m.num_nodes());
      for (std::size_t i = 0; i < m.num_nodes(); i++)
      {
        pa[i] = m.nodes[i][a] + s.pi_beta[a][i];
        pb[i] = m.nodes[i][b] + s.pi_beta[b][i];
      }
      CHECK(rel(cell_form(m, flow, props, g.xi_area(), pa, pb), k.A[a][b], 1.0) <= 1e-12);
    }
  }
  // B from its volume form against the surface jump of pi^1.
  CHECK(rel(k.B[0], k.Bp[0], std::abs(k.F)) <= 1e-8);
}

TEST_CASE("mirror symmetry of the +-phi cells")
{
  FluidProperties props;
  const CellGeometry gp = slope(30.0), gm = slope(-30.0);
  const HomogenizedCoefficients kp =
      cell_coefficients(generate_unit_cell_mesh(gp, 0.1), gp, 2.5, props);
  const HomogenizedCoefficients km =
      cell_coefficients(generate_unit_cell_mesh(gm, 0.1), gm, 2.5, props);
  const double tol = 1e-10;
  CHECK(rel(kp.A[0][0], km.A[0][0], 1.0) <= tol);
  CHECK(rel(kp.A[1][1], km.A[1][1], 1.0) <= tol);
  CHECK(rel(kp.A[0][1], -km.A[0][1], 1.0) <= tol);
  CHECK(rel(kp.F, km.F, kp.F) <= tol);
  CHECK(rel(kp.B[0], -km.B[0], kp.F) <= tol);
  CHECK(rel(kp.B[1], km.B[1], kp.F) <= tol);
  CHECK(rel(kp.Tw, km.Tw, std::abs(kp.Tw)) <= tol);
  CHECK(rel(kp.Mw, km.Mw, std::abs(kp.Mw)) <= tol);
  CHECK(rel(kp.Wbar[0], -km.Wbar[0], std::abs(kp.Wbar[0])) <= tol);
}

TEST_CASE("zero transverse speed gives zero flow coefficients")
{
  FluidProperties props;
  const CellGeometry g = slope(30.0);
  const HomogenizedCoefficients k =
      cell_coefficients(generate_unit_cell_mesh(g, 0.15), g, 0.0, props);
  CHECK(k.Mw == 0.0);
  CHECK(k.Tw == 0.0);
  CHECK(k.Twp == 0.0);
  CHECK(k.Wbar[0] == 0.0);
  CHECK(k.Wbar[1] == 0.0);
  CHECK(k.max_speed == 0.0);
}

TEST_CASE("Mach guard triggers exactly at tau |w|^2 = c^2")
{
  CellGeometry g;
  const Mesh m = generate_unit_cell_mesh(g, 0.25);
  FluidProperties props;
  props.tau = 4.0;  // c / sqrt(tau) = 171.5 exactly
  REQUIRE(props.mach_speed_bound() == 171.5);
  const double at = 171.5, below = std::nextafter(171.5, 0.0);
  CHECK_THROWS_AS(assemble_Aw(m, uniform_flow(m, {0.0, 0.0, at}, props), props, 1.0),
                  MachBoundError);
  CHECK_NOTHROW(assemble_Aw(m, uniform_flow(m, {0.0, 0.0, below}, props), props, 1.0));
  CHECK_THROWS_AS(assemble_Aw(m, uniform_flow(m, {0.0, at, 0.0}, props), props, 1.0),
                  MachBoundError);
  FlowField f = uniform_flow(m, {0.0, 0.0, at}, props);
  CHECK_FALSE(f.mach_bound_ok);
  f = uniform_flow(m, {0.0, 0.0, below}, props);
  CHECK(f.mach_bound_ok);
}

TEST_CASE("corrector loads are compatible")
{
  FluidProperties props;
  const CellGeometry g = slope(60.0);
  const Mesh m = generate_unit_cell_mesh(g, 0.1);
  const FlowField flow = solve_cell_potential_flow(m, 2.5, props);
  const CellSolutionSet s = CellProblems(m, flow, props, g.xi_area()).solve_all();
  for (int k = 0; k < 4; k++)
  {
    CHECK(s.compatibility[k] <= 1e-10);
    CHECK(s.residual[k] <= 1e-10);
  }
}

TEST_CASE("sweep rows are ordered and independent of the worker count")
{
  FluidProperties props;
  const std::vector<double> angles = {0.0, 60.0}, speeds = {0.0, 8.0};
  set_thread_count(1);
  const auto a = sweep_coefficients(angles, speeds, CellGeometry{}, 0.2, props);
  set_thread_count(3);
  const auto b = sweep_coefficients(angles, speeds, CellGeometry{}, 0.2, props);
  set_thread_count(0);
  REQUIRE(a.size() == 4);
  std::ostringstream sa, sb;
  write_sweep_csv(sa, a);
  write_sweep_csv(sb, b);
  CHECK(sa.str() == sb.str());
  CHECK(a[1].phi_deg == 0.0);
  CHECK(a[1].U3 == 8.0);
  CHECK(a[2].phi_deg == 60.0);
  // phi = 60 at 8 m/s exceeds the Mach bound: recorded, not fatal.
  CHECK_FALSE(a[3].coeffs.has_value());
  CHECK(a[3].error.find("Mach") != std::string::npos);
  CHECK(a[2].coeffs.has_value());
}
