#include <gtest/gtest.h>

#include <random>

#include "vdpg/dofmap.hpp"

using namespace vdpg;
using Eigen::Vector2d;
using Eigen::Vector3d;
using Eigen::VectorXd;

namespace {

struct SideValues {
  Vector2d u, t;  // trace and physical flux vector
  Vector3d j;
};

// Interface variables of one element side at a physical position of its master parameter s.
SideValues side_values(const Mesh& mesh, const DofMap& d, int elem, int side, const VectorXd& local, double t) {
  const Layout& lay = d.layout;
  const int off = side * lay.side_dim;
  const VectorXd tr = edge_values(EdgeFamily::trace, d.orders.trace(), t);
  const VectorXd fl = edge_values(EdgeFamily::legendre, d.orders.flux(), t);
  const Vector2d ref = side_point(side, t);
  const MapPoint mp = ref_map_eval(mesh, elem, ref.x(), ref.y());
  const Vector2d tan = mp.J * side_direction(side);
  const Vector2d n = Vector2d(tan.y(), -tan.x()).normalized(), tau(-n.y(), n.x());
  SideValues v;
  for (int c = 0; c < 2; ++c) v.u(c) = tr.dot(local.segment(off + lay.u_hat(c), lay.ntr));
  v.t = fl.dot(local.segment(off + lay.t_hat(0), lay.nfl)) * n + fl.dot(local.segment(off + lay.t_hat(1), lay.nfl)) * tau;
  for (int c = 0; c < 3; ++c) v.j(c) = fl.dot(local.segment(off + lay.j_hat(c), lay.nfl));
  return v;
}

// Max mismatch of the interface variables seen from the two sides of every interior edge:
// traces agree, fluxes are opposite.
double continuity_defect(const Mesh& mesh, const DofMap& d, const VectorXd& g) {
  double worst = 0;
  for (std::size_t e = 0; e < mesh.edges.size(); ++e) {
    if (!d.topo.edge_is_master[e] || mesh.edges[e].tag != BoundaryTag::interior) continue;
    for (double s : {-0.83, -0.31, 0.17, 0.66}) {
      std::vector<SideValues> seen;
      for (const auto& [elem, side] : d.topo.master_sides[e]) {
        const SideRef& r = d.topo.sides[elem][side];
        const double t = (2 * s - (r.s0 + r.s1)) / (r.s1 - r.s0);
        if (std::abs(t) > 1) continue;
        seen.push_back(side_values(mesh, d, elem, side, d.gather(elem, g), t));
      }
      EXPECT_EQ(seen.size(), 2u) << "edge " << e;
      if (seen.size() != 2) continue;
      worst = std::max({worst, (seen[0].u - seen[1].u).norm(), (seen[0].t + seen[1].t).norm(),
                        (seen[0].j + seen[1].j).norm()});
    }
  }
  return worst;
}

// Three nested refinements in one corner.
Mesh nested_mesh() {
  Mesh m = build_rect_mesh(4, 4);
  for (int round = 0; round < 3; ++round) {
    const auto act = m.active_elements();
    m = refine(m, {act.front()});
  }
  return m;
}

}  // namespace

TEST(DofMap, CountsOnBenchmarkMeshes) {
  const Mesh m0 = build_initial_mesh();
  EXPECT_EQ(build_dofmap(m0, {}).total_dofs(), 5123u);
  EXPECT_EQ(build_dofmap(refine_uniform(m0), {}).total_dofs(), 19604u);
}

TEST(DofMap, EdgeBlockLayout) {
  const DofMap d = build_dofmap(build_rect_mesh(1, 1), {});
  EXPECT_EQ(d.edge_block(), 19);
  EXPECT_EQ(d.edge_tn(), 4);
  EXPECT_EQ(d.edge_j(2), 16);
  EXPECT_EQ(d.n_interface, 4 * 2 + 4 * 19);
}

TEST(DofMap, TwoElementsShareOneEdge) {
  const DofMap one = build_dofmap(build_rect_mesh(1, 1), {});
  const DofMap two = build_dofmap(build_rect_mesh(2, 1), {});
  // shared edge: its 19 edge DoFs and 2 x 2 vertex DoFs appear once
  EXPECT_EQ(two.n_interface, 2 * one.n_interface - 19 - 4);
}

TEST(DofMap, InterfaceContinuityConforming) {
  std::mt19937 gen(3);
  std::normal_distribution<double> N;
  const Mesh mesh = build_initial_mesh();
  const DofMap d = build_dofmap(mesh, {});
  VectorXd g(d.n_interface);
  for (int i = 0; i < g.size(); ++i) g(i) = N(gen);
  EXPECT_LT(continuity_defect(mesh, d, g), 1e-12);
}

TEST(DofMap, InterfaceContinuityWithHangingNodes) {
  std::mt19937 gen(5);
  std::normal_distribution<double> N;
  for (const Mesh& mesh : {nested_mesh(), refine(build_initial_mesh(), {0, 7, 30})}) {
    const DofMap d = build_dofmap(mesh, {});
    ASSERT_FALSE(d.topo.hanging.empty());
    VectorXd g(d.n_interface);
    for (int i = 0; i < g.size(); ++i) g(i) = N(gen);
    EXPECT_LT(continuity_defect(mesh, d, g), 1e-12);
  }
}

// On 1-irregular meshes the master of a hanging vertex never ends at another hanging vertex.
TEST(DofMap, HangingMastersEndAtFreeVertices) {
  for (unsigned seed = 1; seed <= 20; ++seed) {
    std::mt19937 gen(seed);
    Mesh mesh = build_rect_mesh(4, 4);
    for (int round = 0; round < 4; ++round) {
      const auto act = mesh.active_elements();
      mesh = refine(mesh, {act[gen() % act.size()], act[gen() % act.size()]});
    }
    const DofMap d = build_dofmap(mesh, {});
    for (const auto& h : d.topo.hanging)
      for (int v : mesh.edges[h.parent].v) EXPECT_GE(d.vertex_dof[v], 0);
  }
}

TEST(DofMap, PoiseuilleTraceReproducedOnInflow) {
  const Mesh mesh = build_initial_mesh();
  BoundaryConditions bc;
  auto pois = [](const Vector2d& x) { return Vector2d(1.5 * (1 - x.y() * x.y() / 4), 0); };
  bc[BoundaryTag::inflow].fix_u = {true, true};
  bc[BoundaryTag::inflow].u_value = pois;
  bc[BoundaryTag::inflow].fix_j = true;
  bc[BoundaryTag::inflow].j_value = [](const Vector2d& x, const Vector2d& n) {
    return Vector3d(n.x() * (1 + x.y()), 2 * n.x(), -x.y());
  };
  const DofMap d = build_dofmap(mesh, bc);
  const VectorXd g = d.expand(VectorXd::Zero(d.n_eq));
  int checked = 0;
  for (int id : d.topo.active)
    for (int s = 0; s < 4; ++s) {
      if (mesh.edges[mesh.elements[id].side[s]].tag != BoundaryTag::inflow) continue;
      for (double t : {-0.9, -0.2, 0.4, 0.95}) {
        const SideValues v = side_values(mesh, d, id, s, d.gather(id, g), t);
        const Vector2d ref = side_point(s, t);
        const MapPoint mp = ref_map_eval(mesh, id, ref.x(), ref.y());
        EXPECT_LT((v.u - pois(mp.x)).norm(), 1e-13);
        EXPECT_LT((v.j - Vector3d(-(1 + mp.x.y()), -2, -mp.x.y())).norm(), 1e-13);  // n = (-1, 0)
        ++checked;
      }
    }
  EXPECT_EQ(checked, 8);
}

TEST(DofMap, GaugePinOnlyWithoutNormalStressData) {
  BoundaryConditions bc;
  EXPECT_GE(build_dofmap(build_rect_mesh(2, 2), bc).pinned, 0);
  bc[BoundaryTag::wall].fix_tn = true;
  EXPECT_EQ(build_dofmap(build_rect_mesh(2, 2), bc).pinned, -1);
}

TEST(DofMap, EquationsAreGroupContiguous) {
  BoundaryConditions bc;
  bc[BoundaryTag::wall].fix_u = {true, true};
  bc.fix_all_j = true;
  const DofMap d = build_dofmap(refine(build_rect_mesh(3, 2), {0}), bc);
  EXPECT_EQ(d.group_start.back(), d.n_eq);
  int prev = -1;
  for (int id = 0; id < d.n_interface; ++id)
    if (d.eq[id] >= 0) {
      EXPECT_EQ(d.eq[id], prev + 1);
      prev = d.eq[id];
    }
  for (std::size_t e = 0; e < d.edge_dof.size(); ++e)
    if (d.edge_dof[e] >= 0)
      for (int k = 0; k < 9; ++k) EXPECT_EQ(d.eq[d.edge_dof[e] + d.edge_j(0) + k], -1);
}
