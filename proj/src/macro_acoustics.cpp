// Copyright 2026 The perfohom Authors
// SPDX-License-Identifier: Apache-2.0

#include "perfohom/macro_acoustics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <omp.h>

#include "perfohom/cell_flow.hpp"
#include "perfohom/errors.hpp"
#include "perfohom/kernels.hpp"

namespace perfohom
{

namespace
{

using Triplets = std::vector<Eigen::Triplet<Complex>>;
using Local = std::array<std::array<double, 2>, 2>;

struct Segment
{
  double h;
  Local K;   // (phi_a', phi_b')
  Local M;   // (phi_a, phi_b)
  Local D;   // (phi_a, phi_b')
  Local Dt;  // (phi_a', phi_b)
};

Segment segment(const MacroProblem &pb, std::size_t e)
{
  const double h = pb.topology.x1[e + 1] - pb.topology.x1[e];
  if (!(h > 0.0))
  {
    throw GeometryError("interface nodes are not strictly ordered along x1");
  }
  Segment s;
  s.h = h;
  s.K = {{{1.0 / h, -1.0 / h}, {-1.0 / h, 1.0 / h}}};
  s.M = {{{h / 3.0, h / 6.0}, {h / 6.0, h / 3.0}}};
  s.D = {{{-0.5, 0.5}, {-0.5, 0.5}}};
  s.Dt = {{{-0.5, -0.5}, {0.5, 0.5}}};
  return s;
}

// Mean of w.n over a port, outward normal.
double mean_normal_speed(const Mesh &mesh, const FlowField &flow, const std::string &name)
{
  const auto &g = mesh.group(name);
  double flux = 0.0, len = 0.0;
  for (std::size_t k = 0; k + 1 < g.size(); k += 2)
  {
    const Vec3 &a = mesh.nodes[g[k]], &b = mesh.nodes[g[k + 1]];
    const double nx = b[1] - a[1], ny = -(b[0] - a[0]);
    const Vec3 &wa = flow.w[g[k]], &wb = flow.w[g[k + 1]];
    flux += 0.5 * ((wa[0] + wb[0]) * nx + (wa[1] + wb[1]) * ny);
    len += std::hypot(nx, ny);
  }
  return len > 0.0 ? flux / len : 0.0;
}

}  // namespace

MacroProblem make_macro_problem(std::shared_ptr<const Mesh> mesh, FlowField flow,
                                std::vector<HomogenizedCoefficients> coefficients,
                                const FluidProperties &props, const MacroOptions &options)
{
  if (!mesh)
  {
    throw InvalidArgument("macro problem needs a mesh");
  }
  props.validate();
  if (!(options.eps0 > 0.0) || !std::isfinite(options.p_incident))
  {
    throw InvalidArgument("eps0 must be positive and the incident amplitude finite");
  }
  MacroProblem pb;
  pb.topology = analyze_waveguide(*mesh);
  if (coefficients.size() + 1 != pb.topology.minus_nodes.size())
  {
    std::ostringstream msg;
    msg << "missing coefficients: Gamma0 has " << pb.topology.minus_nodes.size() - 1
        << " segments, got " << coefficients.size();
    throw InvalidArgument(msg.str());
  }
  if (!flow.empty())
  {
    if (flow.w.size() != mesh->num_nodes())
    {
      throw InvalidArgument("macro flow does not match the waveguide mesh");
    }
    flow.update_mach(props);
    if (!flow.mach_bound_ok)
    {
      throw MachBoundError(flow.max_speed, props.mach_speed_bound());
    }
  }
  pb.mesh = std::move(mesh);
  pb.flow = std::move(flow);
  pb.coefficients = std::move(coefficients);
  pb.props = props;
  pb.options = options;
  return pb;
}

Eigen::VectorXcd MacroSolution::p0(const MacroProblem &pb) const
{
  const auto &t = pb.topology;
  Eigen::VectorXcd v(t.minus_nodes.size());
  for (std::size_t i = 0; i < t.minus_nodes.size(); i++)
  {
    v[i] = 0.5 * (P[t.plus_nodes[i]] + P[t.minus_nodes[i]]);
  }
  return v;
}

Eigen::VectorXcd MacroSolution::g0() const { return 0.5 * (G_plus + G_minus); }

Eigen::VectorXcd MacroSolution::delta_P(const MacroProblem &pb) const
{
  const auto &t = pb.topology;
  Eigen::VectorXcd v(t.minus_nodes.size());
  for (std::size_t i = 0; i < t.minus_nodes.size(); i++)
  {
    v[i] = P[t.plus_nodes[i]] - P[t.minus_nodes[i]];
  }
  return v;
}

Eigen::VectorXcd MacroSolution::delta_G1(const MacroProblem &pb) const
{
  return (G_plus - G_minus) / pb.options.eps0;
}

Eigen::SparseMatrix<Complex> interface_block(const MacroProblem &pb, double omega)
{
  const std::size_t n = pb.num_interface_nodes();
  const double c2 = pb.props.c * pb.props.c;
  const double th = pb.props.theta();
  const Complex iw(0.0, omega);
  Triplets trip;
  trip.reserve(16 * n);
  for (std::size_t e = 0; e + 1 < n; e++)
  {
    const Segment s = segment(pb, e);
    const HomogenizedCoefficients &k = pb.coefficients[e];
    for (int a = 0; a < 2; a++)
    {
      const int i = static_cast<int>(e) + a;
      for (int b = 0; b < 2; b++)
      {
        const int j = static_cast<int>(e) + b;
        const int gi = static_cast<int>(n) + i, gj = static_cast<int>(n) + j;
        // q0 row: A, mass, advection; g0 column: B, Tw.
        const Complex pp = c2 * k.A[0][0] * s.K[a][b] -
                           omega * omega * (k.fluid_mass() + k.Mw) * s.M[a][b] +
                           iw * th * (k.Wbar[0] * s.D[a][b] + k.Wbarp[0] * s.Dt[a][b]);
        const Complex pg = c2 * k.B[0] * s.Dt[a][b] + iw * th * k.Tw * s.M[a][b];
        // c^2 psi row: B', Tw' on p0; F on g0.
        const Complex gp = c2 * k.Bp[0] * s.D[a][b] + iw * c2 * k.Twp * s.M[a][b];
        const Complex gg = -c2 * k.F * s.M[a][b];
        trip.emplace_back(i, j, pp);
        trip.emplace_back(i, gj, pg);
        trip.emplace_back(gi, j, gp);
        trip.emplace_back(gi, gj, gg);
      }
    }
  }
  Eigen::SparseMatrix<Complex> m(2 * n, 2 * n);
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

ComplexSystem assemble_coupled_system(const MacroProblem &pb, double omega, Exec exec)
{
  if (!(omega > 0.0) || !std::isfinite(omega))
  {
    throw InvalidArgument("omega must be positive");
  }
  const Mesh &mesh = *pb.mesh;
  const auto &props = pb.props;
  const auto &opt = pb.options;
  const double c = props.c, c2 = c * c;
  const Complex iw(0.0, omega);
  const bool advect = opt.outer_advection && !pb.flow.empty();

  double f_in = 1.0, f_out = 1.0;
  if (opt.flow_corrected_ports && !pb.flow.empty())
  {
    f_in = 1.0 / (1.0 + mean_normal_speed(mesh, pb.flow, groups::kInlet) / c);
    f_out = 1.0 / (1.0 + mean_normal_speed(mesh, pb.flow, groups::kOutlet) / c);
  }
  const std::string source = opt.source_at_outlet ? groups::kOutlet : groups::kInlet;
  const double f_src = opt.source_at_outlet ? f_out : f_in;

  FormSpec spec;
  spec.add(TermKind::grad_grad, c2).add(TermKind::mass, -omega * omega);
  if (advect)
  {
    spec.add(TermKind::adv_skew, iw * props.theta()).add(TermKind::adv_adv, -props.tau);
  }
  // c^2 d_nw P = -(i omega c) P + 2 (i omega c) p_inc on the ports.
  spec.add(TermKind::boundary_mass, iw * c * f_in, groups::kInlet)
      .add(TermKind::boundary_mass, iw * c * f_out, groups::kOutlet)
      .add(TermKind::boundary_load, 2.0 * iw * c * f_src * opt.p_incident, source);
  const ComplexSystem outer = assemble_complex(mesh, spec, advect ? &pb.flow : nullptr, exec);

  const std::size_t np = mesh.num_nodes();
  const std::size_t n = pb.num_interface_nodes();
  const int gp0 = static_cast<int>(np), gm0 = static_cast<int>(np + n);
  const auto &plus = pb.topology.plus_nodes;
  const auto &minus = pb.topology.minus_nodes;

  Triplets trip;
  trip.reserve(outer.matrix.nonZeros() + 40 * n);
  for (int k = 0; k < outer.matrix.outerSize(); k++)
  {
    for (Eigen::SparseMatrix<Complex>::InnerIterator it(outer.matrix, k); it; ++it)
    {
      trip.emplace_back(it.row(), it.col(), it.value());
    }
  }
  // Traces: c^2 d_nw P = +i omega c^2 G+ on Gamma0+ (outward normal -e3) and
  // -i omega c^2 G- on Gamma0- (outward normal +e3).
  for (std::size_t e = 0; e + 1 < n; e++)
  {
    const Segment s = segment(pb, e);
    for (int a = 0; a < 2; a++)
    {
      for (int b = 0; b < 2; b++)
      {
        const std::size_t i = e + a, j = e + b;
        const Complex m = iw * c2 * s.M[a][b];
        trip.emplace_back(plus[i], gp0 + static_cast<int>(j), -m);
        trip.emplace_back(minus[i], gm0 + static_cast<int>(j), m);
        // Layer equation: i omega c^2 (q0, Delta G1).
        trip.emplace_back(gp0 + static_cast<int>(i), gp0 + static_cast<int>(j), m / opt.eps0);
        trip.emplace_back(gp0 + static_cast<int>(i), gm0 + static_cast<int>(j), -m / opt.eps0);
        // Coupling equation (times c^2): -(c^2 / eps0) (psi, P+ - P-).
        const double d = c2 * s.M[a][b] / opt.eps0;
        trip.emplace_back(gm0 + static_cast<int>(i), plus[j], -d);
        trip.emplace_back(gm0 + static_cast<int>(i), minus[j], d);
      }
    }
  }
  // Interface block with p0 = (P+ + P-) / 2 and i omega g0 = i omega (G+ + G-) / 2.
  const Eigen::SparseMatrix<Complex> blk = interface_block(pb, omega);
  for (int k = 0; k < blk.outerSize(); k++)
  {
    for (Eigen::SparseMatrix<Complex>::InnerIterator it(blk, k); it; ++it)
    {
      const int r = static_cast<int>(it.row()), col = static_cast<int>(it.col());
      const int row = r < static_cast<int>(n) ? gp0 + r : gm0 + (r - static_cast<int>(n));
      if (col < static_cast<int>(n))
      {
        trip.emplace_back(row, plus[col], 0.5 * it.value());
        trip.emplace_back(row, minus[col], 0.5 * it.value());
      }
      else
      {
        const int j = col - static_cast<int>(n);
        trip.emplace_back(row, gp0 + j, 0.5 * iw * it.value());
        trip.emplace_back(row, gm0 + j, 0.5 * iw * it.value());
      }
    }
  }
  ComplexSystem sys;
  sys.matrix.resize(static_cast<Eigen::Index>(np + 2 * n), static_cast<Eigen::Index>(np + 2 * n));
  sys.matrix.setFromTriplets(trip.begin(), trip.end());
  sys.rhs = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(np + 2 * n));
  sys.rhs.head(static_cast<Eigen::Index>(np)) = outer.rhs;
  return sys;
}

namespace
{

MacroSolution unpack(const MacroProblem &pb, double omega, const Eigen::VectorXcd &x, double res)
{
  const auto np = static_cast<Eigen::Index>(pb.mesh->num_nodes());
  const auto n = static_cast<Eigen::Index>(pb.num_interface_nodes());
  MacroSolution s;
  s.omega = omega;
  s.P = x.head(np);
  s.G_plus = x.segment(np, n);
  s.G_minus = x.segment(np + n, n);
  s.residual = res;
  return s;
}

MacroSolution solve_with(DirectSolver<Complex> &solver, const MacroProblem &pb, double omega,
                         Exec exec)
{
  const ComplexSystem sys = assemble_coupled_system(pb, omega, exec);
  double res = 0.0;
  try
  {
    solver.factorize(sys.matrix);
    const Eigen::VectorXcd x = solver.solve(sys.rhs, &res);
    return unpack(pb, omega, x, res);
  }
  catch (const SolverError &ex)
  {
    std::ostringstream msg;
    msg << ex.what() << " (omega = " << omega << " rad/s)";
    throw SolverError(msg.str());
  }
}

}  // namespace

MacroSolution solve_frequency(const MacroProblem &pb, double omega, Exec exec)
{
  DirectSolver<Complex> solver(pb.options.solver);
  return solve_with(solver, pb, omega, exec);
}

double port_energy(const Mesh &mesh, const Eigen::VectorXcd &P, const std::string &group)
{
  const auto &g = mesh.group(group);
  if (g.empty())
  {
    throw InvalidArgument("port group '" + group + "' is empty");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < g.size(); k += 2)
  {
    const Complex a = P[g[k]], b = P[g[k + 1]];
    const double h = facet_measure(mesh, std::span<const int>(g.data() + k, 2));
    sum += h / 3.0 * (std::norm(a) + std::real(a * std::conj(b)) + std::norm(b));
  }
  return sum;
}

TransmissionLoss transmission_loss(const MacroSolution &sol, const MacroProblem &pb)
{
  TransmissionLoss t;
  t.flux_in = port_energy(*pb.mesh, sol.P, groups::kInlet);
  t.flux_out = port_energy(*pb.mesh, sol.P, groups::kOutlet);
  const double src = pb.options.source_at_outlet ? t.flux_out : t.flux_in;
  const double rcv = pb.options.source_at_outlet ? t.flux_in : t.flux_out;
  if (!(src > 0.0))
  {
    throw SolverError("zero pressure on the source port");
  }
  t.tl_db = 10.0 * std::log10(rcv / src);
  return t;
}

std::vector<SweepPoint> frequency_sweep(const MacroProblem &pb, const std::vector<double> &omegas,
                                        Exec exec)
{
  std::vector<SweepPoint> out(omegas.size());
  const auto n = static_cast<std::int64_t>(omegas.size());
  auto run = [&](DirectSolver<Complex> &solver, std::int64_t k, Exec inner)
  {
    auto &pt = out[k];
    pt.omega = omegas[k];
    try
    {
      pt.tl = transmission_loss(solve_with(solver, pb, omegas[k], inner), pb);
    }
    catch (const std::exception &ex)
    {
      pt.error = ex.what();
    }
  };
  if (exec == Exec::serial || thread_count() == 1)
  {
    DirectSolver<Complex> solver(pb.options.solver);
    for (std::int64_t k = 0; k < n; k++)
    {
      run(solver, k, exec);
    }
    return out;
  }
#pragma omp parallel num_threads(thread_count())
  {
    DirectSolver<Complex> solver(pb.options.solver);
#pragma omp for schedule(dynamic, 1)
    for (std::int64_t k = 0; k < n; k++)
    {
      run(solver, k, Exec::serial);
    }
  }
  return out;
}

void write_tl_csv(std::ostream &out, const std::vector<SweepPoint> &points)
{
  out << kTlCsvHeader << '\n';
  out.precision(17);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto &p : points)
  {
    const TransmissionLoss t = p.tl.value_or(TransmissionLoss{nan, nan, nan});
    out << p.omega << ',' << p.omega / (2.0 * std::numbers::pi) << ',' << t.tl_db << ','
        << t.flux_in << ',' << t.flux_out << ',' << -t.tl_db << '\n';
  }
}

std::vector<Complex> reconstruct_micro_pressure(const MacroSolution &sol, const MacroProblem &pb,
                                                double x1, const CellSolutionSet &cell)
{
  const auto &x = pb.topology.x1;
  const double tol = 1e-12 * (x.back() - x.front());
  if (x1 < x.front() - tol || x1 > x.back() + tol)
  {
    throw InvalidArgument("position lies outside Gamma0");
  }
  const std::size_t nn = cell.xi.size();
  if (cell.pi_beta[0].size() != nn || cell.pi_P.size() != nn)
  {
    throw InvalidArgument("incomplete cell solution set");
  }
  std::size_t e = static_cast<std::size_t>(
      std::upper_bound(x.begin(), x.end(), x1) - x.begin());
  e = std::clamp<std::size_t>(e, 1, x.size() - 1) - 1;
  const double h = x[e + 1] - x[e];
  const double t = std::clamp((x1 - x[e]) / h, 0.0, 1.0);
  const Eigen::VectorXcd p0 = sol.p0(pb), g0 = sol.g0();
  const Complex p = (1.0 - t) * p0[e] + t * p0[e + 1];
  const Complex g = (1.0 - t) * g0[e] + t * g0[e + 1];
  const Complex dp = (p0[e + 1] - p0[e]) / h;
  const Complex iw(0.0, sol.omega);
  const double eps = pb.options.eps0;
  std::vector<Complex> out(nn);
  for (std::size_t i = 0; i < nn; i++)
  {
    out[i] = p + eps * (cell.pi_beta[0][i] * dp + iw * (cell.xi[i] * g + cell.pi_P[i] * p));
  }
  return out;
}

CoefficientProvider::CoefficientProvider(const CellGeometry &geom, double resolution,
                                         const FluidProperties &props, double quantum,
                                         SolveOptions opts)
  : geom_(geom), props_(props), quantum_(quantum), opts_(opts)
{
  if (!(quantum > 0.0))
  {
    throw InvalidArgument("U3 quantum must be positive");
  }
  mesh_ = std::make_shared<const Mesh>(generate_unit_cell_mesh(geom, resolution));
}

double CoefficientProvider::quantize(double U3) const
{
  return static_cast<double>(std::llround(U3 / quantum_)) * quantum_;
}

std::vector<HomogenizedCoefficients> CoefficientProvider::coefficients(const std::vector<double> &U3,
                                                                       Exec exec)
{
  std::vector<long long> keys(U3.size());
  std::vector<long long> missing;
  for (std::size_t i = 0; i < U3.size(); i++)
  {
    if (!std::isfinite(U3[i]))
    {
      throw InvalidArgument("U3 must be finite");
    }
    keys[i] = std::llround(U3[i] / quantum_);
    if (!cache_.count(keys[i]) &&
        std::find(missing.begin(), missing.end(), keys[i]) == missing.end())
    {
      missing.push_back(keys[i]);
    }
  }
  std::sort(missing.begin(), missing.end());
  std::vector<std::optional<HomogenizedCoefficients>> fresh(missing.size());
  std::vector<std::string> errors(missing.size());
  auto task = [&](std::size_t k, Exec inner)
  {
    try
    {
      fresh[k] = cell_coefficients(*mesh_, geom_, static_cast<double>(missing[k]) * quantum_,
                                   props_, {inner, opts_});
    }
    catch (const std::exception &ex)
    {
      errors[k] = ex.what();
    }
  };
  const auto nm = static_cast<std::int64_t>(missing.size());
  if (exec == Exec::serial || nm < 2)
  {
    for (std::int64_t k = 0; k < nm; k++)
    {
      task(static_cast<std::size_t>(k), exec);
    }
  }
  else
  {
#pragma omp parallel for schedule(dynamic, 1) num_threads(thread_count())
    for (std::int64_t k = 0; k < nm; k++)
    {
      task(static_cast<std::size_t>(k), Exec::serial);
    }
  }
  for (std::size_t k = 0; k < missing.size(); k++)
  {
    if (!fresh[k])
    {
      std::ostringstream msg;
      msg << "cell problem at U3 = " << static_cast<double>(missing[k]) * quantum_
          << " m/s failed: " << errors[k];
      throw SolverError(msg.str());
    }
    cache_.emplace(missing[k], *fresh[k]);
    solves_++;
  }
  std::vector<HomogenizedCoefficients> out;
  out.reserve(U3.size());
  for (long long key : keys)
  {
    out.push_back(cache_.at(key));
  }
  return out;
}

CellSolutionSet CoefficientProvider::cell_solutions(double U3) const
{
  const FlowField flow = solve_cell_potential_flow(*mesh_, quantize(U3), props_, Exec::parallel, opts_);
  const CellProblems problems(*mesh_, flow, props_, geom_.xi_area(), Exec::parallel, opts_);
  return problems.solve_all();
}

}  // namespace perfohom
