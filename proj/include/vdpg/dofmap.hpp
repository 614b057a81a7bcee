#pragma once

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <vector>

#include "vdpg/forms.hpp"
#include "vdpg/geometry.hpp"

namespace vdpg {

// Boundary data of one boundary tag. Unset value functions mean zero.
struct EdgeRule {
  std::array<bool, 2> fix_u{false, false};
  bool fix_tn = false, fix_tt = false, fix_j = false;
  std::function<Eigen::Vector2d(const Eigen::Vector2d& x)> u_value;
  // (j11, j12, j22) of the flux (u.n) T for the element-outward normal n.
  std::function<Eigen::Vector3d(const Eigen::Vector2d& x, const Eigen::Vector2d& n)> j_value;
};

struct BoundaryConditions {
  std::array<EdgeRule, 6> rule;  // indexed by BoundaryTag
  bool fix_all_j = false;        // lambda = 0: the j-hat variables do not enter the form
  EdgeRule& operator[](BoundaryTag t) { return rule[static_cast<int>(t)]; }
  const EdgeRule& operator[](BoundaryTag t) const { return rule[static_cast<int>(t)]; }
};

// Global interface numbering. Field DoFs are element-local and condensed;
// interface DoFs live on unconstrained vertices (trace values) and master edges
// (trace bubbles and all flux coefficients). Hanging sides are expressed through
// their master edge by polynomial restriction.
struct ElementMap {
  std::vector<int> dofs;  // global interface DoF ids touched by the element
  Eigen::MatrixXd C;      // local interface coefficients = C * global(dofs)
};

struct DofMap {
  PolyOrders orders;
  Layout layout;
  MeshTopology topo;
  int n_interface = 0;                // all interface DoFs (fixed ones included)
  std::vector<int> vertex_dof;        // vertex -> first of its two trace DoFs or -1
  std::vector<int> edge_dof;          // master edge -> first of its edge DoFs or -1
  std::vector<int> eq;                // interface DoF -> equation index or -1 (fixed or pinned)
  std::vector<double> fixed_value;    // value of fixed DoFs (0 for free ones)
  std::vector<int> group_start;       // equation ranges of one vertex or one edge
  int n_eq = 0;
  int pinned = -1;                    // interface DoF fixed to 0 to remove the pressure nullspace
  std::vector<ElementMap> elements;   // indexed by element id (empty for inactive ones)

  int edge_block() const;             // DoFs per master edge
  int trace_bubbles() const { return layout.ntr - 2; }
  // Offsets inside an edge block.
  int edge_u_bubble(int c) const { return c * trace_bubbles(); }
  int edge_tn() const { return 2 * trace_bubbles(); }
  int edge_tt() const { return edge_tn() + layout.nfl; }
  int edge_j(int c) const { return edge_tt() + layout.nfl + c * layout.nfl; }

  std::size_t total_dofs() const { return static_cast<std::size_t>(layout.fields()) * topo.active.size() + n_interface; }
  std::size_t num_groups() const { return group_start.size() - 1; }

  // Interface null vector of the pressure shift: t_n constant mode = -1 on every edge.
  Eigen::VectorXd pressure_null_interface() const;
  // Pressure coefficients of a constant p = 1 within an element.
  std::vector<int> pressure_constant_modes() const;

  // Local interface vector of an element from the full interface vector.
  Eigen::VectorXd gather(int elem, const Eigen::VectorXd& interface) const;
  // Full interface vector (fixed values included) from equation unknowns.
  Eigen::VectorXd expand(const Eigen::VectorXd& x) const;
};

DofMap build_dofmap(const Mesh& mesh, const BoundaryConditions& bc, const PolyOrders& orders = {});

// Physical point and element-outward unit normal of a master edge at its parameter s in [-1, 1].
void edge_point(const Mesh& mesh, const MeshTopology& topo, int edge, double s, Eigen::Vector2d& x,
                Eigen::Vector2d& n);

}  // namespace vdpg
