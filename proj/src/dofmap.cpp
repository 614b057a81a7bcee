#include "vdpg/dofmap.hpp"

#include <map>
#include <stdexcept>

namespace vdpg {

using Eigen::MatrixXd;
using Eigen::Vector2d;
using Eigen::VectorXd;

namespace {

using Expr = std::vector<std::pair<int, double>>;

void axpy(Expr& out, double a, const Expr& e) {
  for (const auto& [id, c] : e) out.emplace_back(id, a * c);
}

// L2 projection on [-1, 1] of a scalar function onto the edge family (all modes).
VectorXd project(EdgeFamily family, int order, const std::function<double(double)>& g) {
  const int n = edge_dim(family, order);
  const GaussRule<double>& rule = cached_gauss(order + 4);
  MatrixXd M = MatrixXd::Zero(n, n);
  VectorXd r = VectorXd::Zero(n);
  for (int q = 0; q < rule.size(); ++q) {
    const VectorXd phi = edge_values(family, order, rule.points(q));
    M.noalias() += rule.weights(q) * phi * phi.transpose();
    r += rule.weights(q) * g(rule.points(q)) * phi;
  }
  return M.ldlt().solve(r);
}

}  // namespace

int DofMap::edge_block() const { return 2 * trace_bubbles() + 5 * layout.nfl; }

void edge_point(const Mesh& mesh, const MeshTopology& topo, int edge, double s, Vector2d& x, Vector2d& n) {
  for (const auto& [elem, side] : topo.master_sides[edge]) {
    const SideRef& r = topo.sides[elem][side];
    const double lo = std::min(r.s0, r.s1), hi = std::max(r.s0, r.s1);
    if (s < lo - 1e-14 || s > hi + 1e-14) continue;
    const double t = (2 * s - (r.s0 + r.s1)) / (r.s1 - r.s0);
    const Vector2d ref = side_point(side, t);
    const MapPoint mp = ref_map_eval(mesh, elem, ref.x(), ref.y());
    const Vector2d tan = mp.J * side_direction(side);
    x = mp.x;
    n = Vector2d(tan.y(), -tan.x()).normalized();
    return;
  }
  throw std::logic_error("edge_point: parameter outside every side of edge " + std::to_string(edge));
}

DofMap build_dofmap(const Mesh& mesh, const BoundaryConditions& bc, const PolyOrders& orders) {
  orders.validate();
  DofMap d;
  d.orders = orders;
  d.layout = Layout(orders);
  d.topo = build_topology(mesh);
  const MeshTopology& topo = d.topo;
  const Layout& lay = d.layout;
  const int nb = d.trace_bubbles(), nfl = lay.nfl, eb = d.edge_block();
  const int ptr = orders.trace(), pfl = orders.flux();

  // Interface numbering, one group per vertex and per master edge.
  std::vector<int> group_first{0};
  d.vertex_dof.assign(mesh.vertices.size(), -1);
  d.edge_dof.assign(mesh.edges.size(), -1);
  int n = 0;
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v)
    if (topo.vertex_in_use[v] && topo.hanging_vertex_master[v] < 0) {
      d.vertex_dof[v] = n;
      n += 2;
      group_first.push_back(n);
    }
  for (std::size_t e = 0; e < mesh.edges.size(); ++e)
    if (topo.edge_is_master[e]) {
      d.edge_dof[e] = n;
      n += eb;
      group_first.push_back(n);
    }
  d.n_interface = n;

  // Boundary data.
  std::vector<char> fixed(n, 0);
  d.fixed_value.assign(n, 0.0);
  bool any_tn_fixed = false;
  for (std::size_t e = 0; e < mesh.edges.size(); ++e) {
    if (!topo.edge_is_master[e]) continue;
    const int base = d.edge_dof[e];
    if (bc.fix_all_j)
      for (int k = 0; k < 3 * nfl; ++k) fixed[base + d.edge_j(0) + k] = 1;
    const Edge& ed = mesh.edges[e];
    if (ed.tag == BoundaryTag::interior) continue;
    const EdgeRule& rule = bc[ed.tag];
    const auto [elem, side] = topo.master_sides[e].front();
    const SideRef& sr = topo.sides[elem][side];
    const double sigma = sr.s1 > sr.s0 ? 1.0 : -1.0;
    auto at = [&](double s) {
      std::pair<Vector2d, Vector2d> xn;
      edge_point(mesh, topo, static_cast<int>(e), s, xn.first, xn.second);
      return xn;
    };
    for (int c = 0; c < 2; ++c) {
      if (!rule.fix_u[c]) continue;
      auto g = [&](const Vector2d& x) { return rule.u_value ? rule.u_value(x)(c) : 0.0; };
      for (int k = 0; k < 2; ++k) {
        const int id = d.vertex_dof[ed.v[k]] + c;
        fixed[id] = 1;
        d.fixed_value[id] = g(mesh.vertices[ed.v[k]]);
      }
      const double g0 = d.fixed_value[d.vertex_dof[ed.v[0]] + c], g1 = d.fixed_value[d.vertex_dof[ed.v[1]] + c];
      const VectorXd coef = project(EdgeFamily::trace, ptr, [&](double s) {
        return g(at(s).first) - g0 * (1 - s) / 2 - g1 * (1 + s) / 2;
      });
      for (int k = 0; k < nb; ++k) {
        fixed[base + d.edge_u_bubble(c) + k] = 1;
        d.fixed_value[base + d.edge_u_bubble(c) + k] = coef(2 + k);
      }
    }
    for (int k = 0; k < nfl; ++k) {
      if (rule.fix_tn) fixed[base + d.edge_tn() + k] = 1;
      if (rule.fix_tt) fixed[base + d.edge_tt() + k] = 1;
    }
    any_tn_fixed = any_tn_fixed || rule.fix_tn;
    if (rule.fix_j && !bc.fix_all_j)
      for (int c = 0; c < 3; ++c) {
        VectorXd coef = VectorXd::Zero(nfl);
        if (rule.j_value)
          coef = sigma * project(EdgeFamily::legendre, pfl, [&](double s) {
                   const auto xn = at(s);
                   return rule.j_value(xn.first, xn.second)(c);
                 });
        for (int k = 0; k < nfl; ++k) {
          fixed[base + d.edge_j(c) + k] = 1;
          d.fixed_value[base + d.edge_j(c) + k] = coef(k);
        }
      }
  }

  // Pressure gauge: with every t_n free, (p, t_n) = (c, -c) lies in the kernel of the form.
  if (!any_tn_fixed)
    for (std::size_t e = 0; e < mesh.edges.size(); ++e)
      if (topo.edge_is_master[e]) {
        d.pinned = d.edge_dof[e] + d.edge_tn();
        fixed[d.pinned] = 1;
        d.fixed_value[d.pinned] = 0;
        break;
      }

  d.eq.assign(n, -1);
  d.group_start.assign(1, 0);
  for (std::size_t g = 0; g + 1 < group_first.size(); ++g) {
    for (int id = group_first[g]; id < group_first[g + 1]; ++id)
      if (!fixed[id]) d.eq[id] = d.n_eq++;
    if (d.n_eq > d.group_start.back()) d.group_start.push_back(d.n_eq);
  }

  // Vertex value expressions, recursive through chains of hanging vertices.
  const VectorXd mid = edge_values(EdgeFamily::trace, ptr, 0.0);
  std::array<std::map<int, Expr>, 2> memo;
  std::function<const Expr&(int, int)> vertex_expr = [&](int v, int c) -> const Expr& {
    auto it = memo[c].find(v);
    if (it != memo[c].end()) return it->second;
    Expr e;
    if (d.vertex_dof[v] >= 0) {
      e.emplace_back(d.vertex_dof[v] + c, 1.0);
    } else {
      const int m = topo.hanging_vertex_master[v];
      if (m < 0) throw std::logic_error("vertex " + std::to_string(v) + " has neither DoFs nor a master edge");
      axpy(e, mid(0), vertex_expr(mesh.edges[m].v[0], c));
      axpy(e, mid(1), vertex_expr(mesh.edges[m].v[1], c));
      for (int k = 0; k < nb; ++k) e.emplace_back(d.edge_dof[m] + d.edge_u_bubble(c) + k, mid(2 + k));
    }
    return memo[c].emplace(v, std::move(e)).first->second;
  };

  d.elements.assign(mesh.elements.size(), {});
  for (int id : topo.active) {
    std::vector<Expr> rows(lay.interface());
    for (int s = 0; s < 4; ++s) {
      const SideRef& r = topo.sides[id][s];
      const int m = r.master, base = d.edge_dof[m];
      const double a = (r.s1 - r.s0) / 2, b = (r.s0 + r.s1) / 2, sigma = a > 0 ? 1.0 : -1.0;
      const MatrixXd Rt = restriction_matrix(EdgeFamily::trace, ptr, a, b);
      const MatrixXd Rf = restriction_matrix(EdgeFamily::legendre, pfl, a, b);
      const int off = s * lay.side_dim;
      for (int c = 0; c < 2; ++c) {
        std::vector<Expr> master(lay.ntr);
        master[0] = vertex_expr(mesh.edges[m].v[0], c);
        master[1] = vertex_expr(mesh.edges[m].v[1], c);
        for (int k = 0; k < nb; ++k) master[2 + k] = {{base + d.edge_u_bubble(c) + k, 1.0}};
        for (int i = 0; i < lay.ntr; ++i)
          for (int j = 0; j < lay.ntr; ++j)
            if (Rt(i, j) != 0) axpy(rows[off + lay.u_hat(c) + i], Rt(i, j), master[j]);
      }
      for (int i = 0; i < nfl; ++i)
        for (int j = 0; j < nfl; ++j) {
          if (Rf(i, j) == 0) continue;
          rows[off + lay.t_hat(0) + i].emplace_back(base + d.edge_tn() + j, Rf(i, j));
          rows[off + lay.t_hat(1) + i].emplace_back(base + d.edge_tt() + j, Rf(i, j));
          for (int c = 0; c < 3; ++c) rows[off + lay.j_hat(c) + i].emplace_back(base + d.edge_j(c) + j, sigma * Rf(i, j));
        }
    }
    ElementMap& em = d.elements[id];
    std::map<int, int> col;
    for (const Expr& e : rows)
      for (const auto& [g, c] : e) col.emplace(g, 0);
    for (auto& [g, k] : col) {
      k = static_cast<int>(em.dofs.size());
      em.dofs.push_back(g);
    }
    em.C = MatrixXd::Zero(lay.interface(), em.dofs.size());
    for (int i = 0; i < lay.interface(); ++i)
      for (const auto& [g, c] : rows[i]) em.C(i, col[g]) += c;
  }
  return d;
}

VectorXd DofMap::pressure_null_interface() const {
  VectorXd z = VectorXd::Zero(n_interface);
  for (int b : edge_dof)
    if (b >= 0) z(b + edge_tn()) = -1;
  return z;
}

std::vector<int> DofMap::pressure_constant_modes() const {
  const int k = orders.p + 1;
  std::vector<int> m;
  for (int i : {0, 1, k, k + 1}) m.push_back(layout.field(comp::p, i));
  return m;
}

VectorXd DofMap::gather(int elem, const VectorXd& interface) const {
  const ElementMap& em = elements[elem];
  VectorXd g(em.dofs.size());
  for (std::size_t k = 0; k < em.dofs.size(); ++k) g(k) = interface(em.dofs[k]);
  return em.C * g;
}

VectorXd DofMap::expand(const VectorXd& x) const {
  VectorXd full = Eigen::Map<const VectorXd>(fixed_value.data(), n_interface);
  for (int id = 0; id < n_interface; ++id)
    if (eq[id] >= 0) full(id) = x(eq[id]);
  return full;
}

}  // namespace vdpg
