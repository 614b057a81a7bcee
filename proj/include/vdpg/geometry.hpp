#pragma once

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <iosfwd>
#include <set>
#include <string>
#include <vector>

namespace vdpg {

enum class BoundaryTag { interior, inflow, outflow, wall, cylinder, reflective };

const char* to_string(BoundaryTag tag);
BoundaryTag boundary_tag_from_string(const std::string& name);

struct BenchGeometry {
  double cylinder_radius = 1.0;
  double half_channel_height = 2.0;
  double upstream_length = 7.5;
  double downstream_length = 7.5;
  Eigen::Vector2d cylinder_center = Eigen::Vector2d::Zero();

  void validate() const;
  // Channel rectangle minus the upper half-disk.
  double area() const;
};

// Side curve of a root cell, parametrized on t in [-1,1]: linear in length for
// segments, linear in angle for circular arcs.
struct Curve {
  enum class Kind { line, arc };
  Kind kind = Kind::line;
  Eigen::Vector2d p0 = Eigen::Vector2d::Zero(), p1 = Eigen::Vector2d::Zero();
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  double radius = 0, theta0 = 0, theta1 = 0;

  static Curve line(const Eigen::Vector2d& a, const Eigen::Vector2d& b);
  static Curve arc(const Eigen::Vector2d& center, double radius, double theta0, double theta1);
  Eigen::Vector2d point(double t) const;
  Eigen::Vector2d tangent(double t) const;
};

// Coarsest cell; its transfinite map defines the geometry of all descendants.
struct RootCell {
  std::array<Eigen::Vector2d, 4> corners;
  std::array<Curve, 4> sides;  // side i runs from corner i to corner i+1
  bool curved() const;
};

struct RefBox {
  double x0 = -1, x1 = 1, y0 = -1, y1 = 1;
};

struct Element {
  std::array<int, 4> v{};                 // counterclockwise corner vertices
  std::array<int, 4> side{};              // edge ids at this element's level
  int level = 0;
  int parent = -1;
  int root = 0;
  std::array<int, 4> children{-1, -1, -1, -1};
  RefBox box;                              // sub-square of the root reference square
  bool active = true;
  bool curved = false;
};

// Edges are stored with v[0] < v[1]; the global orientation runs from v[0] to v[1].
struct Edge {
  std::array<int, 2> v{};
  BoundaryTag tag = BoundaryTag::interior;
  int parent = -1;
  int child_index = -1;  // 0: contains the parent's v[0], 1: contains v[1]
  std::array<int, 2> children{-1, -1};
  int midpoint = -1;
};

struct Mesh {
  std::vector<Eigen::Vector2d> vertices;
  std::vector<RootCell> roots;
  std::vector<Element> elements;
  std::vector<Edge> edges;
  // Cylinder circle (radius 0 when there is none).
  Eigen::Vector2d circle_center = Eigen::Vector2d::Zero();
  double circle_radius = 0;

  std::vector<int> active_elements() const;
  int num_active() const;
};

struct MapPoint {
  Eigen::Vector2d x;
  Eigen::Matrix2d J;  // J(i,j) = dx_i / dxi_j
};

Mesh build_initial_mesh(const BenchGeometry& geom = {});
Mesh build_rect_mesh(int nx, int ny, double x0 = 0, double x1 = 1, double y0 = 0, double y1 = 1);

MapPoint ref_map_eval(const Mesh& mesh, int elem, double xi, double eta);

// Reference coordinates of local side i at side parameter t (counterclockwise).
Eigen::Vector2d side_point(int side, double t);
// d(xi,eta)/dt along local side i.
Eigen::Vector2d side_direction(int side);

// With closure=false the 1-irregular closure is skipped (used to test its minimality).
Mesh refine(const Mesh& mesh, const std::set<int>& marked, bool closure = true);
Mesh refine_uniform(const Mesh& mesh);

// Hanging relations: (child edge, parent edge, child index) for every constrained edge.
struct HangingEdge {
  int child, parent, child_index;
};

// Derived topology of the active mesh.
struct SideRef {
  int edge = -1;    // edge at the element's level
  int master = -1;  // edge carrying the DoFs (== edge unless hanging)
  double s0 = -1, s1 = 1;  // side endpoints in the master's parameter
};

struct MeshTopology {
  std::vector<int> active;
  std::vector<std::array<SideRef, 4>> sides;           // indexed by element id
  std::vector<char> edge_in_use, edge_is_master;
  std::vector<std::vector<std::pair<int, int>>> master_sides;  // master edge -> (elem, side)
  std::vector<int> hanging_vertex_master;              // vertex -> master edge or -1
  std::vector<char> vertex_in_use;
  std::vector<HangingEdge> hanging;
};

MeshTopology build_topology(const Mesh& mesh);

// Invariant audit; returns human-readable violations (empty when sound).
std::vector<std::string> audit(const Mesh& mesh);

double total_area(const Mesh& mesh, int npts = 12);
int element_quadrature_points(const Mesh& mesh, int elem, int base);

// Plain-text dump/load (format documented in README).
void dump_mesh(const Mesh& mesh, std::ostream& os);
Mesh load_mesh(std::istream& is);

struct VtkField {
  std::string name;
  int ncomp = 1;
  std::function<Eigen::VectorXd(int elem, double xi, double eta)> eval;
};

// Legacy VTK unstructured grid; each active element is subdivided into subdiv^2 quads
// with its own (discontinuous) point data.
void write_vtk(const Mesh& mesh, const std::string& path, const std::vector<VtkField>& fields = {},
               int subdiv = 2);

}  // namespace vdpg
