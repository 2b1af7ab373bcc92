// Copyright 2026 The perfohom Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PERFOHOM_MACRO_ACOUSTICS_HPP
#define PERFOHOM_MACRO_ACOUSTICS_HPP

#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "perfohom/cell_problems.hpp"
#include "perfohom/coefficients.hpp"
#include "perfohom/fem.hpp"
#include "perfohom/macro_flow.hpp"
#include "perfohom/mesh.hpp"

namespace perfohom
{

struct MacroOptions
{
  double eps0 = 0.025;           // cell size, m (layer thickness kappa * eps0)
  double p_incident = 300.0;     // Pa
  bool outer_advection = true;   // keep the flow terms in Omega+-
  bool flow_corrected_ports = false;  // port impedance i omega / (c (1 + M_n))
  bool source_at_outlet = false;      // drive the outlet port instead of the inlet
  SolveOptions solver;
};

//
// Waveguide problem at the level of one frequency-independent setup. The
// coefficients are constant on each Gamma0 segment, ordered along x1.
//
struct MacroProblem
{
  std::shared_ptr<const Mesh> mesh;
  WaveguideTopology topology;
  FlowField flow;  // empty for a static fluid
  std::vector<HomogenizedCoefficients> coefficients;
  FluidProperties props;
  MacroOptions options;

  std::size_t num_interface_nodes() const { return topology.minus_nodes.size(); }
  std::size_t num_unknowns() const { return mesh->num_nodes() + 2 * num_interface_nodes(); }
};

// Checks sizes, the Mach bound of the outer flow and the options.
MacroProblem make_macro_problem(std::shared_ptr<const Mesh> mesh, FlowField flow,
                                std::vector<HomogenizedCoefficients> coefficients,
                                const FluidProperties &props, const MacroOptions &options);

//
// Unknowns: P at every mesh node (both traces of Gamma0), then G+ and G- at
// the interface nodes. P, G+ and G- are stored in that order.
//
struct MacroSolution
{
  double omega = 0.0;
  Eigen::VectorXcd P;
  Eigen::VectorXcd G_plus, G_minus;
  double residual = 0.0;

  Eigen::VectorXcd p0(const MacroProblem &pb) const;        // (P+ + P-) / 2
  Eigen::VectorXcd g0() const;                              // (G+ + G-) / 2
  Eigen::VectorXcd delta_P(const MacroProblem &pb) const;   // P+ - P-
  Eigen::VectorXcd delta_G1(const MacroProblem &pb) const;  // (G+ - G-) / eps0
};

//
// Interface block of the layer model in the variables (p0, i omega g0),
// tested with (q0, c^2 psi). Rows and columns 0..n-1 belong to p0 / q0,
// n..2n-1 to g0 / psi.
//
Eigen::SparseMatrix<Complex> interface_block(const MacroProblem &pb, double omega);

// The coupled system in the unknown order of MacroSolution.
ComplexSystem assemble_coupled_system(const MacroProblem &pb, double omega,
                                      Exec exec = Exec::parallel);

MacroSolution solve_frequency(const MacroProblem &pb, double omega, Exec exec = Exec::parallel);

// int |P|^2 over a port group (per unit depth).
double port_energy(const Mesh &mesh, const Eigen::VectorXcd &P, const std::string &group);

struct TransmissionLoss
{
  double tl_db = 0.0;    // 10 log10(receiver / source), the printed convention
  double flux_in = 0.0;  // int_{inlet} |P|^2
  double flux_out = 0.0;  // int_{outlet} |P|^2
};

TransmissionLoss transmission_loss(const MacroSolution &sol, const MacroProblem &pb);

struct SweepPoint
{
  double omega = 0.0;
  std::optional<TransmissionLoss> tl;
  std::string error;
};

// One solve per omega; worker-local factorisations reuse the column ordering.
std::vector<SweepPoint> frequency_sweep(const MacroProblem &pb, const std::vector<double> &omegas,
                                        Exec exec = Exec::parallel);

inline constexpr const char *kTlCsvHeader =
    "omega_rad_s,freq_hz,TL_db,flux_in,flux_out,TL_in_over_out_db";
void write_tl_csv(std::ostream &out, const std::vector<SweepPoint> &points);

//
// Cell-level pressure p0 + eps0 (pi^1 d1 p0 + i omega (xi g0 + pi^P p0)) at
// the interface abscissa x1, using the segment-wise macro data there.
//
std::vector<Complex> reconstruct_micro_pressure(const MacroSolution &sol, const MacroProblem &pb,
                                                double x1, const CellSolutionSet &cell);

//
// Cell coefficients keyed by U3 rounded to a quantum; repeated speeds along
// Gamma0 share one cell solve.
//
class CoefficientProvider
{
public:
  CoefficientProvider(const CellGeometry &geom, double resolution, const FluidProperties &props,
                      double quantum = 0.05, SolveOptions opts = {});

  double quantize(double U3) const;
  // Solves the missing speeds (in parallel over speeds) and returns one set
  // per input speed.
  std::vector<HomogenizedCoefficients> coefficients(const std::vector<double> &U3,
                                                    Exec exec = Exec::parallel);
  CellSolutionSet cell_solutions(double U3) const;
  const Mesh &cell_mesh() const { return *mesh_; }
  const CellGeometry &geometry() const { return geom_; }
  std::size_t cell_solves() const { return solves_; }

private:
  CellGeometry geom_;
  FluidProperties props_;
  double quantum_;
  SolveOptions opts_;
  std::shared_ptr<const Mesh> mesh_;
  std::map<long long, HomogenizedCoefficients> cache_;
  std::size_t solves_ = 0;
};

}  // namespace perfohom

#endif  // PERFOHOM_MACRO_ACOUSTICS_HPP
