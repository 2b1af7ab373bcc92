// Copyright 2026 The perfohom Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PERFOHOM_COEFFICIENTS_HPP
#define PERFOHOM_COEFFICIENTS_HPP

#include <array>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "perfohom/cell_problems.hpp"
#include "perfohom/fem.hpp"
#include "perfohom/mesh.hpp"

namespace perfohom
{

using Vec2 = std::array<double, 2>;
using Mat2 = std::array<Vec2, 2>;

//
// Interface coefficients at one point of Gamma0. All averages are taken over
// Y* (or I+/-) and divided by |Xi|, so A and F equal kappa (not 1) for an
// empty cell. Wbar carries no theta; theta multiplies it in the interface
// equation.
//
struct HomogenizedCoefficients
{
  Mat2 A{};      // a(y_a + pi^a, y_b + pi^b)
  Vec2 B{};      // a(xi, y_a), volume form
  Vec2 Bp{};     // avg_{I+} pi^a - avg_{I-} pi^a
  double F = 0.0;    // -(avg_{I+} xi - avg_{I-} xi)
  double Mw = 0.0;   // theta avg w.grad pi^P
  double Tw = 0.0;   // avg w.grad xi
  double Twp = 0.0;  // avg_{I+} pi^P - avg_{I-} pi^P
  Vec2 Wbar{};   // avg w.grad(y_b + pi^b)
  Vec2 Wbarp{};  // -(c^2/theta) a(pi^b, pi^P) - avg w_b
  Vec2 Qw{};     // c^2 avg d_b pi^P - theta avg w_b - tau avg (w.grad pi^P) w_b
  double zeta_star = 1.0;  // |Y*| / |Y|

  // Provenance.
  double U3 = 0.0;
  double phi_deg = 0.0;
  double kappa = 1.0;
  double max_speed = 0.0;
  std::string mesh_id;

  // avg_{Y*} 1 = zeta* kappa, the mass factor of the interface equation.
  double fluid_mass() const { return zeta_star * kappa; }
};

HomogenizedCoefficients compute_coefficients(const Mesh &mesh, const FlowField &flow,
                                             const CellSolutionSet &sols,
                                             const FluidProperties &props, double kappa);

struct SymmetryCheck
{
  std::string name;
  double defect = 0.0;
  bool pass = true;
};

struct SymmetryReport
{
  std::vector<SymmetryCheck> checks;
  bool all_pass() const;
  // Largest defect among the four structural identities (A, B, T, W).
  double max_structural_defect() const;
  const SymmetryCheck &get(const std::string &name) const;
};

//
// Identities A = A^T, B = B', Tw' = -(theta/c^2) Tw, Wbar' = -Wbar, and the
// internal consistency Qw = theta Wbar'. Defects are relative to the larger
// side, floored by a natural scale of the coefficient (F for B, |w| F for T,
// |w| zeta* kappa for W, theta times that for Q) so vanishing pairs pass.
//
SymmetryReport verify_symmetries(const HomogenizedCoefficients &c, const FluidProperties &props,
                                 double tol = 1e-8);

struct CellRunOptions
{
  Exec exec = Exec::parallel;
  SolveOptions solver;
};

// Cell flow, corrector problems and coefficients for one transverse speed.
HomogenizedCoefficients cell_coefficients(const Mesh &mesh, const CellGeometry &geom, double U3,
                                          const FluidProperties &props,
                                          CellRunOptions opts = {});

struct SweepRow
{
  double phi_deg = 0.0;
  double U3 = 0.0;
  std::optional<HomogenizedCoefficients> coeffs;
  double defect_M3 = 0.0;
  std::string error;
};

//
// Coefficients on the grid angles x speeds. One mesh per angle; the
// (angle, speed) pairs are distributed over workers, rows come back in
// angle-major order whatever the worker count.
//
std::vector<SweepRow> sweep_coefficients(const std::vector<double> &angles_deg,
                                         const std::vector<double> &speeds,
                                         const CellGeometry &base, double resolution,
                                         const FluidProperties &props,
                                         Exec exec = Exec::parallel, SolveOptions opts = {});

inline constexpr const char *kSweepCsvHeader =
    "phi_deg,U3,A11,A12,A22,B1,B2,Bp1,Bp2,F,Mw,Tw,Twp,W1,W2,zeta_star,defect_M3";

void write_sweep_csv(std::ostream &out, const std::vector<SweepRow> &rows);

}  // namespace perfohom

#endif  // PERFOHOM_COEFFICIENTS_HPP
