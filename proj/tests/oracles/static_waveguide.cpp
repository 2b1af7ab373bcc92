// Copyright 2026 The perfohom Authors
// SPDX-License-Identifier: Apache-2.0

#include "static_waveguide.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

#include <Eigen/SparseLU>

namespace oracle
{

using perfohom::Mesh;
using cd = std::complex<double>;

namespace
{

struct Trace
{
  std::vector<int> plus, minus;
  std::vector<double> x;
};

std::vector<int> sorted_nodes(const Mesh &mesh, const char *group)
{
  std::vector<int> nodes = mesh.facet_groups.at(group);
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  std::sort(nodes.begin(), nodes.end(),
            [&](int a, int b) { return mesh.nodes[a][0] < mesh.nodes[b][0]; });
  return nodes;
}

Trace find_trace(const Mesh &mesh)
{
  Trace t;
  t.plus = sorted_nodes(mesh, perfohom::groups::kInterfacePlus);
  t.minus = sorted_nodes(mesh, perfohom::groups::kInterfaceMinus);
  if (t.plus.size() != t.minus.size())
  {
    throw std::runtime_error("oracle: unmatched interface traces");
  }
  for (std::size_t i = 0; i < t.plus.size(); i++)
  {
    const auto &a = mesh.nodes[t.plus[i]], &b = mesh.nodes[t.minus[i]];
    if (std::abs(a[0] - b[0]) > 1e-12 || std::abs(a[1] - b[1]) > 1e-12)
    {
      throw std::runtime_error("oracle: interface traces do not coincide");
    }
    t.x.push_back(a[0]);
  }
  return t;
}

// Helmholtz c^2 K - omega^2 M plus the radiation ports.
void outer(const Mesh &mesh, const StaticSetup &s, double omega,
           std::vector<Eigen::Triplet<cd>> &trip, Eigen::VectorXcd &rhs)
{
  const double c2 = s.c * s.c;
  for (std::size_t e = 0; e < mesh.num_cells(); e++)
  {
    const auto v = mesh.cell(e);
    const auto &p0 = mesh.nodes[v[0]], &p1 = mesh.nodes[v[1]], &p2 = mesh.nodes[v[2]];
    const double det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
    const double area = 0.5 * std::abs(det);
    // Gradients of the barycentric coordinates.
    const double gx[3] = {(p1[1] - p2[1]) / det, (p2[1] - p0[1]) / det, (p0[1] - p1[1]) / det};
    const double gy[3] = {(p2[0] - p1[0]) / det, (p0[0] - p2[0]) / det, (p1[0] - p0[0]) / det};
    for (int a = 0; a < 3; a++)
    {
      for (int b = 0; b < 3; b++)
      {
        const double k = area * (gx[a] * gx[b] + gy[a] * gy[b]);
        const double m = area / 12.0 * (a == b ? 2.0 : 1.0);
        trip.emplace_back(v[a], v[b], c2 * k - omega * omega * m);
      }
    }
  }
  const cd iwc(0.0, omega * s.c);
  for (const bool inlet : {true, false})
  {
    const auto &g =
        mesh.facet_groups.at(inlet ? perfohom::groups::kInlet : perfohom::groups::kOutlet);
    for (std::size_t f = 0; f < g.size(); f += 2)
    {
      const auto &a = mesh.nodes[g[f]], &b = mesh.nodes[g[f + 1]];
      const double h = std::hypot(b[0] - a[0], b[1] - a[1]);
      const int n[2] = {g[f], g[f + 1]};
      for (int i = 0; i < 2; i++)
      {
        for (int j = 0; j < 2; j++)
        {
          trip.emplace_back(n[i], n[j], iwc * h / 6.0 * (i == j ? 2.0 : 1.0));
        }
        if (inlet)
        {
          rhs[n[i]] += 2.0 * iwc * s.p_incident * h / 2.0;
        }
      }
    }
  }
}

Eigen::VectorXcd lu_solve(const Eigen::SparseMatrix<cd> &a, const Eigen::VectorXcd &b)
{
  Eigen::SparseLU<Eigen::SparseMatrix<cd>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success)
  {
    throw std::runtime_error("oracle: factorisation failed");
  }
  Eigen::VectorXcd x = lu.solve(b);
  x += lu.solve(b - a * x);
  return x;
}

}  // namespace

std::vector<StaticLayer> static_layers(const std::vector<perfohom::HomogenizedCoefficients> &k)
{
  std::vector<StaticLayer> out;
  for (const auto &c : k)
  {
    out.push_back({c.A[0][0], c.B[0], c.Bp[0], c.F, c.zeta_star * c.kappa});
  }
  return out;
}

StaticSystem assemble_static(const Mesh &mesh, const std::vector<StaticLayer> &layers,
                             const StaticSetup &s, double omega)
{
  const Trace t = find_trace(mesh);
  const int np = static_cast<int>(mesh.num_nodes());
  const int n = static_cast<int>(t.x.size());
  if (static_cast<int>(layers.size()) != n - 1)
  {
    throw std::runtime_error("oracle: one layer per interface segment expected");
  }
  const double c2 = s.c * s.c;
  const cd iw(0.0, omega);
  std::vector<Eigen::Triplet<cd>> trip;
  StaticSystem sys;
  sys.rhs = Eigen::VectorXcd::Zero(np + 2 * n);
  outer(mesh, s, omega, trip, sys.rhs);

  auto Gp = [&](int i) { return np + i; };
  auto Gm = [&](int i) { return np + n + i; };
  auto row_layer = [&](int i) { return np + i; };
  auto row_coupling = [&](int i) { return np + n + i; };

  for (int e = 0; e + 1 < n; e++)
  {
    const StaticLayer &L = layers[e];
    const double h = t.x[e + 1] - t.x[e];
    const int nodes[2] = {e, e + 1};
    for (int a = 0; a < 2; a++)
    {
      // Test function phi_a on the segment: value integral and derivative.
      const double da = a == 0 ? -1.0 / h : 1.0 / h;
      const int i = nodes[a];
      for (int b = 0; b < 2; b++)
      {
        const double db = b == 0 ? -1.0 / h : 1.0 / h;
        const int j = nodes[b];
        const double mass = h / 6.0 * (a == b ? 2.0 : 1.0);
        const double stiff = da * db * h;
        const double u_dv = db * h / 2.0;  // int phi_a phi_b'
        const double du_v = da * h / 2.0;  // int phi_a' phi_b

        // Flux of Omega+ and Omega- through their Gamma0 traces.
        trip.emplace_back(t.plus[i], Gp(j), -iw * c2 * mass);
        trip.emplace_back(t.minus[i], Gm(j), iw * c2 * mass);

        // Layer equation tested with phi_a, p0 = (P+ + P-)/2, g0 = (G+ + G-)/2.
        const cd on_p = c2 * L.A11 * stiff - omega * omega * L.mass * mass;
        trip.emplace_back(row_layer(i), t.plus[j], 0.5 * on_p);
        trip.emplace_back(row_layer(i), t.minus[j], 0.5 * on_p);
        const cd on_g = iw * c2 * L.B1 * du_v;
        trip.emplace_back(row_layer(i), Gp(j), 0.5 * on_g + iw * c2 * mass / s.eps0);
        trip.emplace_back(row_layer(i), Gm(j), 0.5 * on_g - iw * c2 * mass / s.eps0);

        // Coupling equation tested with c^2 phi_a.
        const double cp = c2 * L.Bp1 * u_dv;
        trip.emplace_back(row_coupling(i), t.plus[j], 0.5 * cp - c2 * mass / s.eps0);
        trip.emplace_back(row_coupling(i), t.minus[j], 0.5 * cp + c2 * mass / s.eps0);
        const cd cg = -iw * c2 * L.F * mass;
        trip.emplace_back(row_coupling(i), Gp(j), 0.5 * cg);
        trip.emplace_back(row_coupling(i), Gm(j), 0.5 * cg);
      }
    }
  }
  sys.matrix.resize(np + 2 * n, np + 2 * n);
  sys.matrix.setFromTriplets(trip.begin(), trip.end());
  return sys;
}

Eigen::VectorXcd solve_static(const Mesh &mesh, const std::vector<StaticLayer> &layers,
                              const StaticSetup &setup, double omega)
{
  const StaticSystem sys = assemble_static(mesh, layers, setup, omega);
  return lu_solve(sys.matrix, sys.rhs).head(static_cast<Eigen::Index>(mesh.num_nodes()));
}

Eigen::VectorXcd solve_glued(const Mesh &mesh, const StaticSetup &setup, double omega)
{
  const Trace t = find_trace(mesh);
  const int np = static_cast<int>(mesh.num_nodes());
  std::vector<Eigen::Triplet<cd>> trip;
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(np);
  outer(mesh, setup, omega, trip, rhs);
  // Renumber every minus trace node onto its plus partner.
  std::vector<int> map(np);
  for (int i = 0; i < np; i++)
  {
    map[i] = i;
  }
  for (std::size_t i = 0; i < t.plus.size(); i++)
  {
    map[t.minus[i]] = t.plus[i];
  }
  std::vector<Eigen::Triplet<cd>> glued;
  for (const auto &x : trip)
  {
    glued.emplace_back(map[x.row()], map[x.col()], x.value());
  }
  Eigen::VectorXcd b = Eigen::VectorXcd::Zero(np);
  for (int i = 0; i < np; i++)
  {
    b[map[i]] += rhs[i];
  }
  // Unused minus rows get an identity so the matrix stays square.
  for (std::size_t i = 0; i < t.minus.size(); i++)
  {
    glued.emplace_back(t.minus[i], t.minus[i], 1.0);
  }
  Eigen::SparseMatrix<cd> a(np, np);
  a.setFromTriplets(glued.begin(), glued.end());
  Eigen::VectorXcd x = lu_solve(a, b);
  for (std::size_t i = 0; i < t.minus.size(); i++)
  {
    x[t.minus[i]] = x[t.plus[i]];
  }
  return x;
}

double tl_db(const Mesh &mesh, const Eigen::VectorXcd &P)
{
  auto energy = [&](const char *port)
  {
    const auto &g = mesh.facet_groups.at(port);
    const double r = 0.5 / std::sqrt(3.0);
    double sum = 0.0;
    for (std::size_t f = 0; f < g.size(); f += 2)
    {
      const auto &a = mesh.nodes[g[f]], &b = mesh.nodes[g[f + 1]];
      const double h = std::hypot(b[0] - a[0], b[1] - a[1]);
      for (double s : {0.5 - r, 0.5 + r})
      {
        sum += 0.5 * h * std::norm((1.0 - s) * P[g[f]] + s * P[g[f + 1]]);
      }
    }
    return sum;
  };
  return 10.0 * std::log10(energy(perfohom::groups::kOutlet) / energy(perfohom::groups::kInlet));
}

}  // namespace oracle
