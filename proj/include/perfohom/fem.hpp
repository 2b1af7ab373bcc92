// Copyright 2026 The perfohom Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PERFOHOM_FEM_HPP
#define PERFOHOM_FEM_HPP

#include <complex>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "perfohom/mesh.hpp"
#include "perfohom/parallel.hpp"

namespace perfohom
{

using Complex = std::complex<double>;

struct FluidProperties
{
  double rho0 = 1.55;  // kg/m^3
  double c = 343.0;    // m/s
  double tau = 3.0;

  double theta() const { return 0.5 * (1.0 + tau); }
  double bulk_modulus() const { return rho0 * c * c; }   // k_f
  double compressibility() const { return 1.0 / bulk_modulus(); }  // gamma_f
  // Largest admissible advection speed c / sqrt(tau).
  double mach_speed_bound() const;
  void validate() const;
};

//
// Steady advection velocity at the nodes of a mesh together with its
// potential (w = -grad Phi). For 2D meshes only the first two components are used.
//
struct FlowField
{
  std::vector<Vec3> w;
  std::vector<double> potential;
  bool mach_bound_ok = true;
  double max_speed = 0.0;

  // Recomputes max_speed and mach_bound_ok.
  void update_mach(const FluidProperties &props);
  bool empty() const { return w.empty(); }
};

// Maps mesh nodes onto unknowns; periodic images share one unknown.
class DofMap
{
public:
  static DofMap identity(std::size_t num_nodes);
  static DofMap periodic(const Mesh &mesh);

  std::size_t num_nodes() const { return dof_.size(); }
  std::size_t num_dofs() const { return num_dofs_; }
  int operator[](std::size_t node) const { return dof_[node]; }
  const std::vector<int> &node_to_dof() const { return dof_; }

  // b_reduced[d] = sum of b over the nodes mapped to d.
  template <typename T>
  Eigen::Matrix<T, Eigen::Dynamic, 1> restrict(const Eigen::Matrix<T, Eigen::Dynamic, 1> &b) const;
  // x[node] = x_reduced[dof(node)].
  template <typename T>
  Eigen::Matrix<T, Eigen::Dynamic, 1> prolong(const Eigen::Matrix<T, Eigen::Dynamic, 1> &x) const;
  template <typename T>
  Eigen::SparseMatrix<T> restrict(const Eigen::SparseMatrix<T> &a) const;

private:
  std::vector<int> dof_;
  std::size_t num_dofs_ = 0;
};

enum class TermKind
{
  grad_grad,       // (grad p, grad q)
  mass,            // (p, q)
  adv_adv,         // (w.grad p, w.grad q)
  adv_skew,        // (q, w.grad p) - (p, w.grad q)
  boundary_mass,   // <p, q> on a facet group
  boundary_load,   // <1, q> on a facet group (right-hand side)
  advection_load,  // (w.grad q, 1) (right-hand side)
  volume_load      // (1, q) (right-hand side)
};

struct FormTerm
{
  TermKind kind;
  Complex weight = 1.0;
  std::string group;                // facet group of boundary terms
  std::vector<double> coefficient;  // optional per-cell (or per-facet) multiplier

  bool is_rhs() const
  {
    return kind == TermKind::boundary_load || kind == TermKind::advection_load ||
           kind == TermKind::volume_load;
  }
  bool needs_flow() const
  {
    return kind == TermKind::adv_adv || kind == TermKind::adv_skew ||
           kind == TermKind::advection_load;
  }
};

struct FormSpec
{
  std::vector<FormTerm> terms;

  FormSpec &add(TermKind kind, Complex weight = 1.0, std::string group = {})
  {
    terms.push_back({kind, weight, std::move(group), {}});
    return *this;
  }
  bool is_real() const;
};

// Sparse matrix and load vector in node numbering (no constraints applied).
template <typename T>
struct LinearSystem
{
  Eigen::SparseMatrix<T> matrix;
  Eigen::Matrix<T, Eigen::Dynamic, 1> rhs;
};

using RealSystem = LinearSystem<double>;
using ComplexSystem = LinearSystem<Complex>;

// P1 assembly of every term. Real assembly rejects complex weights.
RealSystem assemble_real(const Mesh &mesh, const FormSpec &spec, const FlowField *flow = nullptr,
                         Exec exec = Exec::parallel);
ComplexSystem assemble_complex(const Mesh &mesh, const FormSpec &spec,
                               const FlowField *flow = nullptr, Exec exec = Exec::parallel);

struct Constraint
{
  enum class Kind
  {
    none,
    zero_mean,
    dirichlet
  };
  Kind kind = Kind::none;
  std::vector<int> nodes;      // dirichlet nodes
  std::vector<double> values;  // dirichlet values, same length as nodes

  static Constraint zero_mean_constraint() { return {Kind::zero_mean, {}, {}}; }
};

struct SolveOptions
{
  double residual_tol = 1e-10;
  double compatibility_tol = 1e-10;
};

//
// Direct sparse factorisation of a constrained system, reusable across
// right-hand sides. Zero-mean solutions have zero P1-weighted mean (weights
// are the integrals of the basis functions). Symmetric real systems pin one
// dof, factor the SPD remainder and project the mean out afterwards; other
// systems are bordered by one Lagrange multiplier. Residuals are refined in
// extended precision.
//
template <typename T>
class ConstrainedSolver
{
public:
  using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;

  ConstrainedSolver(const Mesh &mesh, const Eigen::SparseMatrix<T> &matrix, const DofMap &dofs,
                    Constraint constraint, SolveOptions opts = {});
  ~ConstrainedSolver();
  ConstrainedSolver(ConstrainedSolver &&) noexcept;
  ConstrainedSolver &operator=(ConstrainedSolver &&) noexcept;

  // Solves for a right-hand side in node numbering; returns nodal values and,
  // optionally, the relative residual of the factored system.
  Vector solve(const Vector &rhs, double *residual = nullptr) const;

  // Compatibility defect |1^T b| / sum |b| of a load in node numbering.
  double compatibility_defect(const Vector &rhs) const;
  const DofMap &dofs() const { return dofs_; }
  // Integral of each P1 basis function (node numbering).
  const std::vector<double> &basis_integrals() const { return weights_; }

private:
  Vector solve_pinned(const Vector &b, const Vector &rhs, double *residual) const;

  struct Impl;
  std::unique_ptr<Impl> impl_;
  DofMap dofs_;
  Constraint constraint_;
  SolveOptions opts_;
  std::vector<double> weights_;
};

//
// Sparse LU of a general square system. The column ordering can be computed
// once and reused for matrices with the same pattern (frequency sweeps).
//
template <typename T>
class DirectSolver
{
public:
  using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;

  explicit DirectSolver(SolveOptions opts = {});
  ~DirectSolver();
  DirectSolver(DirectSolver &&) noexcept;
  DirectSolver &operator=(DirectSolver &&) noexcept;

  void analyze(const Eigen::SparseMatrix<T> &pattern);
  // Analyses on first use; later matrices must share the analysed pattern.
  void factorize(const Eigen::SparseMatrix<T> &matrix);
  // Throws SolverError when the relative residual exceeds the tolerance.
  Vector solve(const Vector &rhs, double *residual = nullptr) const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  SolveOptions opts_;
};

// Convenience one-shot solve.
Eigen::VectorXd solve(const Mesh &mesh, const RealSystem &sys, const DofMap &dofs,
                      const Constraint &constraint, SolveOptions opts = {});
Eigen::VectorXcd solve(const Mesh &mesh, const ComplexSystem &sys, const DofMap &dofs,
                       const Constraint &constraint, SolveOptions opts = {});

// Integral of each P1 basis function over the cells.
std::vector<double> lumped_mass(const Mesh &mesh);

// Integration region: all cells, or one facet group.
struct Region
{
  std::string group;  // empty selects the cells
  static Region cells() { return {}; }
  static Region facets(std::string g) { return {std::move(g)}; }
};

// Exact integral of a nodal P1 field over a region.
double integrate(const Mesh &mesh, const Region &region, std::span<const double> field);
// Integral over the cells of the gradient of a nodal P1 field.
Vec3 integrate_gradient(const Mesh &mesh, std::span<const double> field);
// Measure of a region (throws InvalidArgument when empty).
double region_measure(const Mesh &mesh, const Region &region);
// Cell average normalised by |Xi|, whatever the dimension of the region.
double xi_average(const Mesh &mesh, const Region &region, std::span<const double> field,
                  double xi_area);

// Nodal recovery of a cell-wise constant vector field by volume-weighted
// averaging; nodes tied by `dofs` share one value.
std::vector<Vec3> recover_nodal_gradient(const Mesh &mesh, std::span<const double> field,
                                         const DofMap &dofs);

}  // namespace perfohom

#endif  // PERFOHOM_FEM_HPP
