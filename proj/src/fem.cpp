// Copyright 2026 The perfohom Authors
// SPDX-License-Identifier: Apache-2.0

#include "perfohom/fem.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <sstream>
#include <type_traits>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <omp.h>

#include "perfohom/errors.hpp"
#include "perfohom/kernels.hpp"

namespace perfohom
{

double FluidProperties::mach_speed_bound() const
{
  return c / std::sqrt(tau);
}

void FluidProperties::validate() const
{
  if (!(rho0 > 0.0) || !(c > 0.0))
  {
    throw InvalidArgument("fluid density and sound speed must be positive");
  }
  if (!(tau > 0.0) || !std::isfinite(tau))
  {
    throw InvalidArgument("advection parameter tau must be positive");
  }
}

void FlowField::update_mach(const FluidProperties &props)
{
  double m2 = 0.0;
  for (const auto &v : w)
  {
    m2 = std::max(m2, dot(v, v));
  }
  max_speed = std::sqrt(m2);
  mach_bound_ok = props.tau * m2 < props.c * props.c;
}

//
// DofMap
//

DofMap DofMap::identity(std::size_t n)
{
  DofMap m;
  m.dof_.resize(n);
  std::iota(m.dof_.begin(), m.dof_.end(), 0);
  m.num_dofs_ = n;
  return m;
}

DofMap DofMap::periodic(const Mesh &mesh)
{
  const std::size_t n = mesh.num_nodes();
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto root = [&](int a)
  {
    while (parent[a] != a)
    {
      parent[a] = parent[parent[a]];
      a = parent[a];
    }
    return a;
  };
  for (const auto &p : mesh.periodic_pairs)
  {
    const int a = root(p.master), b = root(p.slave);
    if (a != b)
    {
      parent[std::max(a, b)] = std::min(a, b);
    }
  }
  DofMap m;
  m.dof_.assign(n, -1);
  std::vector<int> root_dof(n, -1);
  int next = 0;
  for (std::size_t i = 0; i < n; i++)
  {
    const int r = root(static_cast<int>(i));
    if (root_dof[r] < 0)
    {
      root_dof[r] = next++;
    }
    m.dof_[i] = root_dof[r];
  }
  m.num_dofs_ = static_cast<std::size_t>(next);
  return m;
}

template <typename T>
Eigen::Matrix<T, Eigen::Dynamic, 1> DofMap::restrict(
    const Eigen::Matrix<T, Eigen::Dynamic, 1> &b) const
{
  Eigen::Matrix<T, Eigen::Dynamic, 1> r = Eigen::Matrix<T, Eigen::Dynamic, 1>::Zero(num_dofs_);
  for (std::size_t i = 0; i < dof_.size(); i++)
  {
    r[dof_[i]] += b[i];
  }
  return r;
}

template <typename T>
Eigen::Matrix<T, Eigen::Dynamic, 1> DofMap::prolong(
    const Eigen::Matrix<T, Eigen::Dynamic, 1> &x) const
{
  Eigen::Matrix<T, Eigen::Dynamic, 1> r(dof_.size());
  for (std::size_t i = 0; i < dof_.size(); i++)
  {
    r[i] = x[dof_[i]];
  }
  return r;
}

template <typename T>
Eigen::SparseMatrix<T> DofMap::restrict(const Eigen::SparseMatrix<T> &a) const
{
  std::vector<Eigen::Triplet<T>> trip;
  trip.reserve(a.nonZeros());
  for (int k = 0; k < a.outerSize(); k++)
  {
    for (typename Eigen::SparseMatrix<T>::InnerIterator it(a, k); it; ++it)
    {
      trip.emplace_back(dof_[it.row()], dof_[it.col()], it.value());
    }
  }
  Eigen::SparseMatrix<T> r(num_dofs_, num_dofs_);
  r.setFromTriplets(trip.begin(), trip.end());
  return r;
}

template Eigen::VectorXd DofMap::restrict(const Eigen::VectorXd &) const;
template Eigen::VectorXcd DofMap::restrict(const Eigen::VectorXcd &) const;
template Eigen::VectorXd DofMap::prolong(const Eigen::VectorXd &) const;
template Eigen::VectorXcd DofMap::prolong(const Eigen::VectorXcd &) const;
template Eigen::SparseMatrix<double> DofMap::restrict(const Eigen::SparseMatrix<double> &) const;
template Eigen::SparseMatrix<Complex> DofMap::restrict(const Eigen::SparseMatrix<Complex> &) const;

bool FormSpec::is_real() const
{
  return std::all_of(terms.begin(), terms.end(),
                     [](const FormTerm &t) { return t.weight.imag() == 0.0; });
}

//
// Assembly
//

namespace
{

template <typename T>
T cast_weight(const Complex &w);

template <>
double cast_weight<double>(const Complex &w)
{
  return w.real();
}

template <>
Complex cast_weight<Complex>(const Complex &w)
{
  return w;
}

// Element matrix for one term with unit weight; only volume terms.
void element_term(const Element &e, const FormTerm &term, const FlowField *flow,
                  double (&k)[4][4], double (&f)[4])
{
  const int n = e.n;
  for (int a = 0; a < n; a++)
  {
    f[a] = 0.0;
    for (int b = 0; b < n; b++)
    {
      k[a][b] = 0.0;
    }
  }
  switch (term.kind)
  {
    case TermKind::grad_grad:
      for (int a = 0; a < n; a++)
      {
        for (int b = a; b < n; b++)
        {
          k[a][b] = k[b][a] = e.measure * dot(e.grad[a], e.grad[b]);
        }
      }
      break;
    case TermKind::mass:
      for (int a = 0; a < n; a++)
      {
        for (int b = a; b < n; b++)
        {
          k[a][b] = k[b][a] = simplex_mass(e.dim, e.measure, a, b);
        }
      }
      break;
    case TermKind::adv_adv:
    {
      const Mat3 m = element_advection_tensor(e, flow->w);
      for (int a = 0; a < n; a++)
      {
        const Vec3 ma = mat_vec(m, e.grad[a]);
        for (int b = a; b < n; b++)
        {
          k[a][b] = k[b][a] = dot(ma, e.grad[b]);
        }
      }
      break;
    }
    case TermKind::adv_skew:
    {
      // Row a is the test function: N_a . grad phi_b - N_b . grad phi_a.
      const auto nw = element_weighted_flow(e, flow->w);
      for (int a = 0; a < n; a++)
      {
        for (int b = a + 1; b < n; b++)
        {
          const double v = dot(nw[a], e.grad[b]) - dot(nw[b], e.grad[a]);
          k[a][b] = v;
          k[b][a] = -v;
        }
      }
      break;
    }
    case TermKind::advection_load:
    {
      const Vec3 wt = element_integral(e, flow->w);
      for (int a = 0; a < n; a++)
      {
        f[a] = dot(wt, e.grad[a]);
      }
      break;
    }
    case TermKind::volume_load:
      for (int a = 0; a < n; a++)
      {
        f[a] = e.measure / n;
      }
      break;
    default:
      break;
  }
}

bool is_volume(TermKind k)
{
  return k != TermKind::boundary_mass && k != TermKind::boundary_load;
}

template <typename T>
void validate_spec(const Mesh &mesh, const FormSpec &spec, const FlowField *flow)
{
  for (const auto &t : spec.terms)
  {
    if (t.needs_flow() && (flow == nullptr || flow->w.size() != mesh.num_nodes()))
    {
      throw InvalidArgument("advective term requires a nodal flow field on the same mesh");
    }
    if (!is_volume(t.kind))
    {
      mesh.group(t.group);
    }
    if constexpr (std::is_same_v<T, double>)
    {
      if (t.weight.imag() != 0.0)
      {
        throw InvalidArgument("complex weight in a real assembly");
      }
    }
  }
}

template <typename T>
LinearSystem<T> assemble_impl(const Mesh &mesh, const FormSpec &spec, const FlowField *flow,
                              Exec exec)
{
  validate_spec<T>(mesh, spec, flow);
  const std::size_t nc = mesh.num_cells();
  const std::size_t nn = mesh.num_nodes();
  const int npc = mesh.nodes_per_cell();

  std::vector<const FormTerm *> volume;
  for (const auto &t : spec.terms)
  {
    if (is_volume(t.kind))
    {
      if (!t.coefficient.empty() && t.coefficient.size() != nc)
      {
        throw InvalidArgument("cell coefficient length does not match the cell count");
      }
      volume.push_back(&t);
    }
  }

  using Triplet = Eigen::Triplet<T>;
  struct Buffer
  {
    std::vector<Triplet> trip;
    std::vector<std::pair<int, T>> load;
  };
  auto run_block = [&](std::size_t begin, std::size_t end, Buffer &buf)
  {
    buf.trip.reserve((end - begin) * npc * npc);
    double k[4][4], f[4];
    T ke[4][4], fe[4];
    for (std::size_t c = begin; c < end; c++)
    {
      const Element e = make_element(mesh, c);
      for (int a = 0; a < npc; a++)
      {
        fe[a] = T(0);
        for (int b = 0; b < npc; b++)
        {
          ke[a][b] = T(0);
        }
      }
      bool has_matrix = false, has_load = false;
      for (const FormTerm *t : volume)
      {
        element_term(e, *t, flow, k, f);
        T w = cast_weight<T>(t->weight);
        if (!t->coefficient.empty())
        {
          w *= t->coefficient[c];
        }
        if (t->is_rhs())
        {
          has_load = true;
          for (int a = 0; a < npc; a++)
          {
            fe[a] += w * f[a];
          }
        }
        else
        {
          has_matrix = true;
          for (int a = 0; a < npc; a++)
          {
            for (int b = 0; b < npc; b++)
            {
              ke[a][b] += w * k[a][b];
            }
          }
        }
      }
      if (has_matrix)
      {
        for (int a = 0; a < npc; a++)
        {
          for (int b = 0; b < npc; b++)
          {
            buf.trip.emplace_back(e.v[a], e.v[b], ke[a][b]);
          }
        }
      }
      if (has_load)
      {
        for (int a = 0; a < npc; a++)
        {
          buf.load.emplace_back(e.v[a], fe[a]);
        }
      }
    }
  };

  std::vector<Buffer> buffers;
  if (exec == Exec::serial || nc == 0)
  {
    buffers.resize(1);
    run_block(0, nc, buffers[0]);
  }
  else
  {
    const int p = std::max(1, std::min<int>(thread_count(), static_cast<int>(nc)));
    buffers.resize(p);
    std::vector<std::string> errors(p);
#pragma omp parallel num_threads(p)
    {
      const int t = omp_get_thread_num();
      const auto [b, e] = static_block(nc, t, p);
      try
      {
        run_block(b, e, buffers[t]);
      }
      catch (const std::exception &ex)
      {
        errors[t] = ex.what();
      }
    }
    for (const auto &msg : errors)
    {
      if (!msg.empty())
      {
        throw GeometryError(msg);
      }
    }
  }

  std::vector<Triplet> trip;
  std::size_t total = 0;
  for (const auto &b : buffers)
  {
    total += b.trip.size();
  }
  trip.reserve(total);
  for (auto &b : buffers)
  {
    trip.insert(trip.end(), b.trip.begin(), b.trip.end());
    std::vector<Triplet>().swap(b.trip);
  }

  LinearSystem<T> sys;
  sys.rhs = Eigen::Matrix<T, Eigen::Dynamic, 1>::Zero(nn);
  for (const auto &b : buffers)
  {
    for (const auto &[row, v] : b.load)
    {
      sys.rhs[row] += v;
    }
  }

  // Facet terms: small, assembled serially in group order.
  const int npf = mesh.nodes_per_facet();
  const int fd = mesh.dim - 1;
  for (const auto &t : spec.terms)
  {
    if (is_volume(t.kind))
    {
      continue;
    }
    const auto &g = mesh.group(t.group);
    const std::size_t nf = g.size() / npf;
    if (!t.coefficient.empty() && t.coefficient.size() != nf)
    {
      throw InvalidArgument("facet coefficient length does not match group '" + t.group + "'");
    }
    for (std::size_t f = 0; f < nf; f++)
    {
      std::span<const int> fv(g.data() + f * npf, npf);
      const double area = facet_measure(mesh, fv);
      T w = cast_weight<T>(t.weight);
      if (!t.coefficient.empty())
      {
        w *= t.coefficient[f];
      }
      for (int a = 0; a < npf; a++)
      {
        if (t.kind == TermKind::boundary_load)
        {
          sys.rhs[fv[a]] += w * (area / npf);
          continue;
        }
        for (int b = 0; b < npf; b++)
        {
          trip.emplace_back(fv[a], fv[b], w * simplex_mass(fd, area, a, b));
        }
      }
    }
  }

  sys.matrix.resize(nn, nn);
  sys.matrix.setFromTriplets(trip.begin(), trip.end());
  return sys;
}

}  // namespace

RealSystem assemble_real(const Mesh &mesh, const FormSpec &spec, const FlowField *flow, Exec exec)
{
  return assemble_impl<double>(mesh, spec, flow, exec);
}

ComplexSystem assemble_complex(const Mesh &mesh, const FormSpec &spec, const FlowField *flow,
                               Exec exec)
{
  return assemble_impl<Complex>(mesh, spec, flow, exec);
}

//
// Constrained solves
//

std::vector<double> lumped_mass(const Mesh &mesh)
{
  std::vector<double> m(mesh.num_nodes(), 0.0);
  for (std::size_t c = 0; c < mesh.num_cells(); c++)
  {
    const double v = cell_measure(mesh, c) / mesh.nodes_per_cell();
    for (int a : mesh.cell(c))
    {
      m[a] += v;
    }
  }
  return m;
}

namespace
{

template <typename T>
using Wide = std::conditional_t<std::is_same_v<T, double>, long double, std::complex<long double>>;

// r = b - A y with long double accumulation; returns |r|.
template <typename T>
double extended_residual(const Eigen::SparseMatrix<T> &a, const Eigen::Matrix<T, Eigen::Dynamic, 1> &y,
                         const Eigen::Matrix<T, Eigen::Dynamic, 1> &b,
                         Eigen::Matrix<T, Eigen::Dynamic, 1> &r)
{
  std::vector<Wide<T>> acc(b.size());
  for (Eigen::Index i = 0; i < b.size(); i++)
  {
    acc[i] = Wide<T>(b[i]);
  }
  for (int k = 0; k < a.outerSize(); k++)
  {
    const Wide<T> yk(y[k]);
    for (typename Eigen::SparseMatrix<T>::InnerIterator it(a, k); it; ++it)
    {
      acc[it.row()] -= Wide<T>(it.value()) * yk;
    }
  }
  r.resize(b.size());
  long double n2 = 0.0L;
  for (Eigen::Index i = 0; i < b.size(); i++)
  {
    r[i] = T(acc[i]);
    n2 += std::norm(acc[i]);
  }
  return static_cast<double>(std::sqrt(n2));
}

}  // namespace

template <typename T>
struct ConstrainedSolver<T>::Impl
{
  using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;
  Eigen::SparseMatrix<T> system;  // factored matrix
  Eigen::SparseLU<Eigen::SparseMatrix<T>, Eigen::COLAMDOrdering<int>> lu;
  // Real zero-mean problems: dof 0 pinned, symmetric factorisation.
  bool pinned = false;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  Eigen::SparseMatrix<T> reduced;
  std::vector<int> free_index;    // reduced dof -> system row, -1 when fixed
  Vector fixed_values;            // per reduced dof (dirichlet)
  Eigen::SparseMatrix<T> coupling;  // reduced matrix, kept for dirichlet lifting
  Vector mean_weights;            // reduced weights (zero-mean)
};

template <typename T>
ConstrainedSolver<T>::ConstrainedSolver(const Mesh &mesh, const Eigen::SparseMatrix<T> &matrix,
                                        const DofMap &dofs, Constraint constraint,
                                        SolveOptions opts)
  : impl_(std::make_unique<Impl>()), dofs_(dofs), constraint_(std::move(constraint)), opts_(opts)
{
  if (static_cast<std::size_t>(matrix.rows()) != dofs.num_nodes() || matrix.rows() != matrix.cols())
  {
    throw InvalidArgument("system size does not match the dof map");
  }
  weights_ = lumped_mass(mesh);
  if (weights_.size() != dofs.num_nodes())
  {
    throw InvalidArgument("mesh does not match the dof map");
  }
  const Eigen::SparseMatrix<T> r = dofs.restrict(matrix);
  const int nd = static_cast<int>(dofs.num_dofs());
  auto &im = *impl_;

  if (constraint_.kind == Constraint::Kind::zero_mean)
  {
    im.mean_weights = Vector::Zero(nd);
    for (std::size_t i = 0; i < weights_.size(); i++)
    {
      im.mean_weights[dofs[i]] += weights_[i];
    }
    if constexpr (std::is_same_v<T, double>)
    {
      const Eigen::SparseMatrix<double> rt = r.transpose();
      if ((rt - r).norm() <= 1e-12 * r.norm() && nd > 1)
      {
        // The singular direction is the constant, so pinning one dof leaves an
        // SPD block; the mean is restored after the solve.
        im.pinned = true;
        im.reduced = r;
        im.system = r.bottomRightCorner(nd - 1, nd - 1);
        im.system.makeCompressed();
        im.ldlt.compute(im.system);
        if (im.ldlt.info() != Eigen::Success)
        {
          throw SolverError("sparse LDLT factorization failed");
        }
        return;
      }
    }
    std::vector<Eigen::Triplet<T>> trip;
    trip.reserve(r.nonZeros() + 2 * nd);
    for (int k = 0; k < r.outerSize(); k++)
    {
      for (typename Eigen::SparseMatrix<T>::InnerIterator it(r, k); it; ++it)
      {
        trip.emplace_back(it.row(), it.col(), it.value());
      }
    }
    // Scale the border like the matrix diagonal to keep pivots balanced.
    double diag = 0.0;
    for (int k = 0; k < nd; k++)
    {
      diag = std::max(diag, std::abs(r.coeff(k, k)));
    }
    const double wsum = im.mean_weights.sum() == T(0) ? 1.0 : std::abs(im.mean_weights.sum());
    const double s = (diag > 0.0 ? diag : 1.0) * nd / wsum;
    for (int k = 0; k < nd; k++)
    {
      trip.emplace_back(k, nd, s * im.mean_weights[k]);
      trip.emplace_back(nd, k, s * im.mean_weights[k]);
    }
    im.system.resize(nd + 1, nd + 1);
    im.system.setFromTriplets(trip.begin(), trip.end());
  }
  else if (constraint_.kind == Constraint::Kind::dirichlet)
  {
    if (constraint_.nodes.size() != constraint_.values.size())
    {
      throw InvalidArgument("dirichlet nodes and values differ in length");
    }
    im.fixed_values = Vector::Zero(nd);
    std::vector<char> fixed(nd, 0);
    for (std::size_t k = 0; k < constraint_.nodes.size(); k++)
    {
      const int n = constraint_.nodes[k];
      if (n < 0 || static_cast<std::size_t>(n) >= dofs.num_nodes())
      {
        throw InvalidArgument("dirichlet node out of range");
      }
      fixed[dofs[n]] = 1;
      im.fixed_values[dofs[n]] = T(constraint_.values[k]);
    }
    im.free_index.assign(nd, -1);
    int nf = 0;
    for (int k = 0; k < nd; k++)
    {
      if (!fixed[k])
      {
        im.free_index[k] = nf++;
      }
    }
    std::vector<Eigen::Triplet<T>> trip;
    for (int k = 0; k < r.outerSize(); k++)
    {
      for (typename Eigen::SparseMatrix<T>::InnerIterator it(r, k); it; ++it)
      {
        const int i = im.free_index[it.row()], j = im.free_index[it.col()];
        if (i >= 0 && j >= 0)
        {
          trip.emplace_back(i, j, it.value());
        }
      }
    }
    im.system.resize(nf, nf);
    im.system.setFromTriplets(trip.begin(), trip.end());
    im.coupling = r;
  }
  else
  {
    im.system = r;
  }
  im.system.makeCompressed();
  im.lu.analyzePattern(im.system);
  im.lu.factorize(im.system);
  if (im.lu.info() != Eigen::Success)
  {
    throw SolverError("sparse LU factorization failed: " + im.lu.lastErrorMessage());
  }
}

template <typename T>
ConstrainedSolver<T>::~ConstrainedSolver() = default;
template <typename T>
ConstrainedSolver<T>::ConstrainedSolver(ConstrainedSolver &&) noexcept = default;
template <typename T>
ConstrainedSolver<T> &ConstrainedSolver<T>::operator=(ConstrainedSolver &&) noexcept = default;

template <typename T>
double ConstrainedSolver<T>::compatibility_defect(const Vector &rhs) const
{
  // Scaled by the unreduced load: periodic images may cancel in the reduced one.
  const double scale = rhs.cwiseAbs().sum();
  return scale == 0.0 ? 0.0 : std::abs(dofs_.restrict(rhs).sum()) / scale;
}

template <typename T>
typename ConstrainedSolver<T>::Vector ConstrainedSolver<T>::solve(const Vector &rhs,
                                                                 double *residual) const
{
  if (static_cast<std::size_t>(rhs.size()) != dofs_.num_nodes())
  {
    throw InvalidArgument("right-hand side length does not match the mesh");
  }
  const auto &im = *impl_;
  const int nd = static_cast<int>(dofs_.num_dofs());
  const Vector b = dofs_.restrict(rhs);
  Vector x_red(nd);
  Vector sys_rhs;

  if (constraint_.kind == Constraint::Kind::zero_mean)
  {
    const double defect = compatibility_defect(rhs);
    if (defect > opts_.compatibility_tol)
    {
      throw CompatibilityError("pure Neumann load is not orthogonal to constants", defect);
    }
    if (im.pinned)
    {
      return dofs_.prolong(solve_pinned(b, rhs, residual));
    }
    sys_rhs = Vector::Zero(nd + 1);
    sys_rhs.head(nd) = b;
  }
  else if (constraint_.kind == Constraint::Kind::dirichlet)
  {
    const Vector lift = im.coupling * im.fixed_values;
    sys_rhs = Vector::Zero(im.system.rows());
    for (int k = 0; k < nd; k++)
    {
      if (im.free_index[k] >= 0)
      {
        sys_rhs[im.free_index[k]] = b[k] - lift[k];
      }
    }
  }
  else
  {
    sys_rhs = b;
  }

  Vector y = im.lu.solve(sys_rhs);
  if (im.lu.info() != Eigen::Success)
  {
    throw SolverError("sparse LU solve failed");
  }
  // Loads that cancel under periodic reduction are measured against the unreduced load.
  const double bn = std::max(sys_rhs.norm(), rhs.norm());
  // Refinement with residuals accumulated in extended precision.
  Vector res;
  double rn = extended_residual(im.system, y, sys_rhs, res);
  for (int it = 0; it < 6 && bn > 0.0 && rn > 1e-3 * opts_.residual_tol * bn; it++)
  {
    y += im.lu.solve(res);
    const double prev = rn;
    rn = extended_residual(im.system, y, sys_rhs, res);
    if (rn > 0.5 * prev)
    {
      break;
    }
  }
  const double rel = bn > 0.0 ? rn / bn : rn;
  if (residual)
  {
    *residual = rel;
  }
  if (!(rel <= opts_.residual_tol))
  {
    std::ostringstream msg;
    msg << "relative residual " << rel << " exceeds " << opts_.residual_tol;
    throw SolverError(msg.str());
  }

  if (constraint_.kind == Constraint::Kind::zero_mean)
  {
    x_red = y.head(nd);
    // Remove the round-off mean left by the factorisation.
    const T mean = im.mean_weights.dot(x_red) / im.mean_weights.sum();
    x_red.array() -= mean;
  }
  else if (constraint_.kind == Constraint::Kind::dirichlet)
  {
    for (int k = 0; k < nd; k++)
    {
      x_red[k] = im.free_index[k] >= 0 ? y[im.free_index[k]] : im.fixed_values[k];
    }
  }
  else
  {
    x_red = y;
  }
  return dofs_.prolong(x_red);
}

template <typename T>
typename ConstrainedSolver<T>::Vector ConstrainedSolver<T>::solve_pinned(const Vector &b,
                                                                        const Vector &rhs,
                                                                        double *residual) const
{
  const auto &im = *impl_;
  const int nd = static_cast<int>(b.size());
  if constexpr (std::is_same_v<T, double>)
  {
    // Drop the round-off incompatibility along the multiplier direction.
    const Vector bc = b - (b.sum() / im.mean_weights.sum()) * im.mean_weights;
    Vector x = Vector::Zero(nd);
    x.tail(nd - 1) = im.ldlt.solve(bc.tail(nd - 1));
    const double bn = std::max(bc.norm(), rhs.norm());
    Vector res;
    double rn = extended_residual(im.reduced, x, bc, res);
    for (int it = 0; it < 6 && bn > 0.0 && rn > 1e-3 * opts_.residual_tol * bn; it++)
    {
      x.tail(nd - 1) += im.ldlt.solve(res.tail(nd - 1));
      const double prev = rn;
      rn = extended_residual(im.reduced, x, bc, res);
      if (rn > 0.5 * prev)
      {
        break;
      }
    }
    x.array() -= im.mean_weights.dot(x) / im.mean_weights.sum();
    rn = extended_residual(im.reduced, x, bc, res);
    const double rel = bn > 0.0 ? rn / bn : rn;
    if (residual)
    {
      *residual = rel;
    }
    if (!(rel <= opts_.residual_tol))
    {
      std::ostringstream msg;
      msg << "relative residual " << rel << " exceeds " << opts_.residual_tol;
      throw SolverError(msg.str());
    }
    return x;
  }
  else
  {
    (void)nd;
    (void)rhs;
    (void)residual;
    throw SolverError("pinned solve is only available for real systems");
  }
}

template <typename T>
struct DirectSolver<T>::Impl
{
  Eigen::SparseMatrix<T> matrix;
  Eigen::SparseLU<Eigen::SparseMatrix<T>, Eigen::COLAMDOrdering<int>> lu;
  bool analyzed = false;
  bool factored = false;
};

template <typename T>
DirectSolver<T>::DirectSolver(SolveOptions opts) : impl_(std::make_unique<Impl>()), opts_(opts)
{
}
template <typename T>
DirectSolver<T>::~DirectSolver() = default;
template <typename T>
DirectSolver<T>::DirectSolver(DirectSolver &&) noexcept = default;
template <typename T>
DirectSolver<T> &DirectSolver<T>::operator=(DirectSolver &&) noexcept = default;

template <typename T>
void DirectSolver<T>::analyze(const Eigen::SparseMatrix<T> &pattern)
{
  if (pattern.rows() != pattern.cols())
  {
    throw InvalidArgument("direct solver needs a square matrix");
  }
  Eigen::SparseMatrix<T> a = pattern;
  a.makeCompressed();
  impl_->lu.analyzePattern(a);
  impl_->analyzed = true;
  impl_->factored = false;
}

template <typename T>
void DirectSolver<T>::factorize(const Eigen::SparseMatrix<T> &matrix)
{
  auto &im = *impl_;
  if (!im.analyzed)
  {
    analyze(matrix);
  }
  im.matrix = matrix;
  im.matrix.makeCompressed();
  im.lu.factorize(im.matrix);
  im.factored = im.lu.info() == Eigen::Success;
  if (!im.factored)
  {
    throw SolverError("sparse LU factorization failed: " + im.lu.lastErrorMessage());
  }
}

template <typename T>
typename DirectSolver<T>::Vector DirectSolver<T>::solve(const Vector &rhs, double *residual) const
{
  const auto &im = *impl_;
  if (!im.factored)
  {
    throw SolverError("solve called before factorize");
  }
  if (rhs.size() != im.matrix.rows())
  {
    throw InvalidArgument("right-hand side length does not match the matrix");
  }
  Vector x = im.lu.solve(rhs);
  const double bn = rhs.norm();
  Vector res;
  double rn = extended_residual(im.matrix, x, rhs, res);
  for (int it = 0; it < 6 && bn > 0.0 && rn > 1e-3 * opts_.residual_tol * bn; it++)
  {
    x += im.lu.solve(res);
    const double prev = rn;
    rn = extended_residual(im.matrix, x, rhs, res);
    if (rn > 0.5 * prev)
    {
      break;
    }
  }
  const double rel = bn > 0.0 ? rn / bn : rn;
  if (residual)
  {
    *residual = rel;
  }
  if (!(rel <= opts_.residual_tol))
  {
    std::ostringstream msg;
    msg << "relative residual " << rel << " exceeds " << opts_.residual_tol;
    throw SolverError(msg.str());
  }
  return x;
}

template class DirectSolver<double>;
template class DirectSolver<Complex>;

template class ConstrainedSolver<double>;
template class ConstrainedSolver<Complex>;

Eigen::VectorXd solve(const Mesh &mesh, const RealSystem &sys, const DofMap &dofs,
                      const Constraint &constraint, SolveOptions opts)
{
  return ConstrainedSolver<double>(mesh, sys.matrix, dofs, constraint, opts).solve(sys.rhs);
}

Eigen::VectorXcd solve(const Mesh &mesh, const ComplexSystem &sys, const DofMap &dofs,
                       const Constraint &constraint, SolveOptions opts)
{
  return ConstrainedSolver<Complex>(mesh, sys.matrix, dofs, constraint, opts).solve(sys.rhs);
}

//
// Integration
//

double region_measure(const Mesh &mesh, const Region &region)
{
  if (region.group.empty())
  {
    if (mesh.num_cells() == 0)
    {
      throw InvalidArgument("integration over an empty cell set");
    }
    return total_measure(mesh);
  }
  if (mesh.group(region.group).empty())
  {
    throw InvalidArgument("integration over empty facet group '" + region.group + "'");
  }
  return group_measure(mesh, region.group);
}

double integrate(const Mesh &mesh, const Region &region, std::span<const double> u)
{
  if (u.size() != mesh.num_nodes())
  {
    throw InvalidArgument("field length does not match the mesh");
  }
  double s = 0.0;
  if (region.group.empty())
  {
    if (mesh.num_cells() == 0)
    {
      throw InvalidArgument("integration over an empty cell set");
    }
    for (std::size_t c = 0; c < mesh.num_cells(); c++)
    {
      double sum = 0.0;
      for (int a : mesh.cell(c))
      {
        sum += u[a];
      }
      s += cell_measure(mesh, c) * sum / mesh.nodes_per_cell();
    }
    return s;
  }
  const auto &g = mesh.group(region.group);
  if (g.empty())
  {
    throw InvalidArgument("integration over empty facet group '" + region.group + "'");
  }
  const std::size_t k = mesh.nodes_per_facet();
  for (std::size_t f = 0; f < g.size(); f += k)
  {
    std::span<const int> fv(g.data() + f, k);
    double sum = 0.0;
    for (int a : fv)
    {
      sum += u[a];
    }
    s += facet_measure(mesh, fv) * sum / static_cast<double>(k);
  }
  return s;
}

Vec3 integrate_gradient(const Mesh &mesh, std::span<const double> u)
{
  if (u.size() != mesh.num_nodes())
  {
    throw InvalidArgument("field length does not match the mesh");
  }
  Vec3 s = {0.0, 0.0, 0.0};
  for (std::size_t c = 0; c < mesh.num_cells(); c++)
  {
    const Element e = make_element(mesh, c);
    const Vec3 g = element_gradient(e, u);
    for (int d = 0; d < 3; d++)
    {
      s[d] += e.measure * g[d];
    }
  }
  return s;
}

double xi_average(const Mesh &mesh, const Region &region, std::span<const double> u,
                  double xi_area)
{
  if (!(xi_area > 0.0))
  {
    throw InvalidArgument("|Xi| must be positive");
  }
  return integrate(mesh, region, u) / xi_area;
}

std::vector<Vec3> recover_nodal_gradient(const Mesh &mesh, std::span<const double> u,
                                         const DofMap &dofs)
{
  std::vector<Vec3> acc(dofs.num_dofs(), Vec3{0.0, 0.0, 0.0});
  std::vector<double> vol(dofs.num_dofs(), 0.0);
  for (std::size_t c = 0; c < mesh.num_cells(); c++)
  {
    const Element e = make_element(mesh, c);
    const Vec3 g = element_gradient(e, u);
    for (int a = 0; a < e.n; a++)
    {
      const int d = dofs[e.v[a]];
      vol[d] += e.measure;
      for (int k = 0; k < 3; k++)
      {
        acc[d][k] += e.measure * g[k];
      }
    }
  }
  std::vector<Vec3> out(mesh.num_nodes());
  for (std::size_t i = 0; i < mesh.num_nodes(); i++)
  {
    const int d = dofs[i];
    for (int k = 0; k < 3; k++)
    {
      out[i][k] = vol[d] > 0.0 ? acc[d][k] / vol[d] : 0.0;
    }
  }
  return out;
}

}  // namespace perfohom
