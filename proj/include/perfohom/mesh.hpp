// Copyright 2026 The perfohom Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PERFOHOM_MESH_HPP
#define PERFOHOM_MESH_HPP

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace perfohom
{

using Vec3 = std::array<double, 3>;

// Facet group names used by the generators.
namespace groups
{
inline constexpr const char *kTop = "I+";
inline constexpr const char *kBottom = "I-";
inline constexpr const char *kLateral = "lateral";
inline constexpr const char *kSolidWall = "wall";
inline constexpr const char *kInlet = "inlet";
inline constexpr const char *kOutlet = "outlet";
inline constexpr const char *kDuctWall = "walls";
inline constexpr const char *kInterfacePlus = "gamma0+";
inline constexpr const char *kInterfaceMinus = "gamma0-";
}  // namespace groups

struct PeriodicPair
{
  int master;
  int slave;
  int direction;  // 1-based lattice direction
  bool operator==(const PeriodicPair &) const = default;
};

//
// Simplex mesh: triangles (dim == 2, third coordinate unused) or tetrahedra.
// Waveguide meshes keep the section coordinates (x1, x3) in slots 0 and 1.
// Cells and facets are stored flat with dim+1 and dim nodes per entry.
//
struct Mesh
{
  int dim = 3;
  std::vector<Vec3> nodes;
  std::vector<int> cells;
  std::map<std::string, std::vector<int>> facet_groups;
  std::vector<PeriodicPair> periodic_pairs;

  int nodes_per_cell() const { return dim + 1; }
  int nodes_per_facet() const { return dim; }
  std::size_t num_nodes() const { return nodes.size(); }
  std::size_t num_cells() const { return cells.size() / static_cast<std::size_t>(dim + 1); }
  std::span<const int> cell(std::size_t c) const
  {
    return {cells.data() + c * static_cast<std::size_t>(dim + 1),
            static_cast<std::size_t>(dim + 1)};
  }
  bool has_group(const std::string &name) const { return facet_groups.count(name) > 0; }
  // Throws InvalidArgument for an unknown group.
  const std::vector<int> &group(const std::string &name) const;
  std::size_t num_facets(const std::string &name) const
  {
    return group(name).size() / static_cast<std::size_t>(dim);
  }

  bool operator==(const Mesh &) const = default;
};

// Named nodal data attached to a mesh file; complex fields use two components.
struct NodalField
{
  std::string name;
  int components = 1;
  std::vector<double> values;  // node-major
  bool operator==(const NodalField &) const = default;
};

//
// Unit cell Y = Xi x kappa(-1/2, 1/2] with a rigid plate of thickness h
// perforated by one cylindrical hole of diameter d inclined by phi.
// Lengths are in cell units (the cell period maps onto eps0 metres).
//
struct CellGeometry
{
  double b1 = 1.0;
  double b2 = 1.0;
  double kappa = 1.0;
  double plate_thickness = 0.25;  // h == 0 means no plate
  double hole_diameter = 0.24;
  double hole_slope_deg = 0.0;
  double eps0 = 0.025;  // metres

  void validate() const;
  double xi_area() const { return b1 * b2; }
  double cell_volume() const { return b1 * b2 * kappa; }
};

//
// Quasi-2D waveguide in the (x1, x3) section: an inlet pipe, a chamber split by
// the interface Gamma0 (a horizontal line spanning the chamber), an outlet
// pipe. Both pipes run along x3 and are centred on the chamber unless
// port_offset shifts them.
//
struct WaveguideGeometry
{
  double l_m = 0.3;      // chamber width (interface length)
  double h_m = 0.2;      // chamber height
  double l_io = 0.2;     // pipe length
  double h_io = 0.0625;  // pipe width
  double width = 0.01;   // x2 depth, only enters per-depth scaling
  double interface_height = 0.1;  // Gamma0 position above the chamber bottom
  double port_offset = 0.0;       // x1 shift of both pipes from the centre

  void validate() const;
};

// Signed measure of cell c (area in 2D, volume in 3D).
double cell_measure(const Mesh &mesh, std::size_t c);
double total_measure(const Mesh &mesh);
// Sum of facet measures of a group (length in 2D, area in 3D).
double group_measure(const Mesh &mesh, const std::string &name);
double facet_measure(const Mesh &mesh, std::span<const int> facet);
// Bounding box diagonal.
double mesh_diameter(const Mesh &mesh);
// Throws GeometryError naming the first cell with non-positive measure.
void check_orientation(const Mesh &mesh);

// Tetrahedral mesh of the fluid part of the unit cell. Negative slopes are
// produced as the exact mirror image (y1 -> b1 - y1) of the positive one.
Mesh generate_unit_cell_mesh(const CellGeometry &geom, double resolution);

// Triangle mesh of the waveguide section with doubled nodes along Gamma0.
Mesh generate_waveguide_mesh(const WaveguideGeometry &geom, double resolution);

// Pairs nodes x and x + period[k] for each direction k (1-based in the result).
// Every node of `required_group` must take part in at least one pair.
std::vector<PeriodicPair> detect_periodic_pairs(const Mesh &mesh, std::span<const Vec3> periods,
                                                double tol,
                                                const std::string &required_group = groups::kLateral);

void save_mesh(const Mesh &mesh, const std::filesystem::path &path,
               std::span<const NodalField> fields = {});
Mesh load_mesh(const std::filesystem::path &path, std::vector<NodalField> *fields = nullptr);

// Text serialisation used by save_mesh / load_mesh.
std::string format_mesh(const Mesh &mesh, std::span<const NodalField> fields = {});
Mesh parse_mesh(const std::string &text, std::vector<NodalField> *fields = nullptr);

//
// Derived structure of a waveguide mesh: subdomain of every cell and the
// Gamma0 node pairs ordered along x1.
//
struct WaveguideTopology
{
  std::vector<int> region;  // per cell: 0 = inlet side (Omega-), 1 = outlet side (Omega+)
  std::vector<int> minus_nodes;  // Gamma0 trace in Omega-, sorted by x1
  std::vector<int> plus_nodes;   // matching trace in Omega+
  std::vector<double> x1;        // interface node abscissae

  std::size_t num_interface_nodes() const { return x1.size(); }
  std::size_t num_interface_segments() const { return x1.empty() ? 0 : x1.size() - 1; }
};

WaveguideTopology analyze_waveguide(const Mesh &mesh);

}  // namespace perfohom

#endif  // PERFOHOM_MESH_HPP
