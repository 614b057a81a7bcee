#include "vdpg/bench.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace vdpg {

using Eigen::Matrix2d;
using Eigen::MatrixXd;
using Eigen::Vector2d;
using Eigen::Vector3d;
using Eigen::VectorXd;

PoiseuilleProfiles::PoiseuilleProfiles(const ModelParams& m)
    : ubar(m.ubar), R(m.R), lambda(m.lambda), eta_s(m.eta_s), eta_p(m.eta_p) {}

FieldState<double> PoiseuilleProfiles::state(const Vector2d& x) const {
  FieldState<double> s;
  s.u << u1(x.y()), 0;
  s.p = p(x.x());
  s.L << 0, du1(x.y()), 0, 0;
  s.T << T11(x.y()), T12(x.y()), T12(x.y()), T22(x.y());
  return s;
}

BoundaryConditions benchmark_bcs(const ModelParams& m) {
  const PoiseuilleProfiles prof(m);
  BoundaryConditions bc;
  auto pois = [prof](const Vector2d& x) { return Vector2d(prof.u1(x.y()), 0.0); };
  EdgeRule& in = bc[BoundaryTag::inflow];
  in.fix_u = {true, true};
  in.u_value = pois;
  in.fix_j = true;
  in.j_value = [prof](const Vector2d& x, const Vector2d& n) {
    const double un = prof.u1(x.y()) * n.x();
    return Vector3d(un * prof.T11(x.y()), un * prof.T12(x.y()), un * prof.T22(x.y()));
  };
  EdgeRule& out = bc[BoundaryTag::outflow];
  out.fix_u = {true, true};
  out.u_value = pois;
  for (BoundaryTag t : {BoundaryTag::wall, BoundaryTag::cylinder}) bc[t].fix_u = {true, true};
  EdgeRule& sym = bc[BoundaryTag::reflective];
  sym.fix_u = {false, true};
  sym.fix_tt = true;
  sym.fix_j = true;
  bc.fix_all_j = m.lambda == 0;
  return bc;
}

Mesh build_channel_mesh(int nx, int ny, double x0, double x1, double y0, double y1) {
  Mesh mesh = build_rect_mesh(nx, ny, x0, x1, y0, y1);
  const double tol = 1e-12 * (1 + std::abs(x1 - x0) + std::abs(y1 - y0));
  for (Edge& e : mesh.edges) {
    if (e.tag == BoundaryTag::interior) continue;
    const Vector2d a = mesh.vertices[e.v[0]], b = mesh.vertices[e.v[1]];
    if (std::abs(a.x() - x0) < tol && std::abs(b.x() - x0) < tol)
      e.tag = BoundaryTag::inflow;
    else if (std::abs(a.x() - x1) < tol && std::abs(b.x() - x1) < tol)
      e.tag = BoundaryTag::outflow;
    else if (std::abs(a.y()) < tol && std::abs(b.y()) < tol)
      e.tag = BoundaryTag::reflective;
  }
  return mesh;
}

FieldVectors project_state(const Mesh& mesh, const DofMap& dm,
                           const std::function<FieldState<double>(const Vector2d&)>& state) {
  const Layout& lay = dm.layout;
  FieldVectors out(mesh.elements.size());
  PolyOrders o = dm.orders;
  o.dp += 2;
  for (int id : dm.topo.active) {
    const ElementQuadrature eq = element_quadrature(mesh, id, o);
    MatrixXd M = MatrixXd::Zero(lay.nf, lay.nf);
    MatrixXd rhs = MatrixXd::Zero(lay.nf, comp::count);
    VectorXd val(lay.nf);
    Eigen::Matrix<double, Eigen::Dynamic, 2> grad(lay.nf, 2);
    for (int q = 0; q < eq.npts; ++q) {
      tensor_basis<double>(dm.orders.p, eq.ref(q, 0), eq.ref(q, 1), val, grad);
      const FieldState<double> s = state(eq.x.row(q).transpose());
      Eigen::Matrix<double, comp::count, 1> c;
      c << s.u(0), s.u(1), s.p, s.L(0, 0), s.L(0, 1), s.L(1, 0), s.L(1, 1), s.T(0, 0), s.T(0, 1), s.T(1, 1);
      M.noalias() += eq.w(q) * val * val.transpose();
      rhs.noalias() += eq.w(q) * val * c.transpose();
    }
    const MatrixXd coef = M.llt().solve(rhs);
    out[id].resize(lay.fields());
    for (int c = 0; c < comp::count; ++c) out[id].segment(lay.field(c), lay.nf) = coef.col(c);
  }
  return out;
}

FieldVectors poiseuille_fields(const Mesh& mesh, const DofMap& dm, const ModelParams& m) {
  const PoiseuilleProfiles prof(m);
  return project_state(mesh, dm, [&prof](const Vector2d& x) { return prof.state(x); });
}

Matrix2d field_stress(const ModelParams& m, const FieldState<double>& s) {
  return -s.p * Matrix2d::Identity() + m.eta_s * (s.L + s.L.transpose()) + s.T;
}

std::array<double, 3> drag_error_conventions(double mismatch_l2_half, double R) {
  const double full = 2 * M_PI * R, half = M_PI * R;
  return {std::sqrt(full) * std::sqrt(2.0) * mismatch_l2_half, std::sqrt(full) * mismatch_l2_half,
          std::sqrt(half) * mismatch_l2_half};
}

namespace {

// Interface and field values on one element side at quadrature point q.
struct SidePoint {
  Vector2d x, n, that;
  double w;
  FieldState<double> s;
};

template <typename F>
void for_each_side_point(const Mesh& mesh, const DofMap& dm, const DiscreteSolution& sol, BoundaryTag tag, F f) {
  const Layout& lay = dm.layout;
  for (int id : dm.topo.active) {
    const Element& el = mesh.elements[id];
    bool any = false;
    for (int s = 0; s < 4; ++s) any = any || mesh.edges[el.side[s]].tag == tag;
    if (!any) continue;
    const ElementQuadrature eq = element_quadrature(mesh, id, dm.orders);
    const VectorXd loc = dm.gather(id, sol.interface);
    for (int s = 0; s < 4; ++s) {
      if (mesh.edges[el.side[s]].tag != tag) continue;
      const auto& sd = eq.sides[s];
      const int off = s * lay.side_dim;
      for (int q = 0; q < sd.t.size(); ++q) {
        const VectorXd fl = edge_values(EdgeFamily::legendre, dm.orders.flux(), sd.t(q));
        SidePoint p;
        p.x = sd.x.row(q).transpose();
        p.n = sd.n.row(q).transpose();
        const Vector2d tau(-p.n.y(), p.n.x());
        p.that = fl.dot(loc.segment(off + lay.t_hat(0), lay.nfl)) * p.n + fl.dot(loc.segment(off + lay.t_hat(1), lay.nfl)) * tau;
        p.w = sd.w(q);
        p.s = eval_fields(lay, sol.fields[id], sd.ref(q, 0), sd.ref(q, 1));
        f(p);
      }
    }
  }
}

}  // namespace

DragEstimates drag_estimates(const Mesh& mesh, const DofMap& dm, const DiscreteSolution& sol, const ModelParams& m) {
  DragEstimates d;
  double flux = 0, field = 0, mis = 0, len = 0;
  for_each_side_point(mesh, dm, sol, BoundaryTag::cylinder, [&](const SidePoint& p) {
    const double sn = (field_stress(m, p.s) * p.n)(0);
    flux += p.w * p.that(0);
    field += p.w * sn;
    mis += p.w * (p.that(0) - sn) * (p.that(0) - sn);
    len += p.w;
  });
  const double c = -2.0 / (m.eta() * m.ubar);
  d.flux = c * flux;
  d.field = c * field;
  d.mismatch_l2_half = std::sqrt(mis);
  d.arc_length = len;
  d.err = drag_error_conventions(d.mismatch_l2_half, m.R)[kDragErrorConvention];
  return d;
}

std::vector<GammaSample> sample_gamma(const Mesh& mesh, const DofMap& dm, const DiscreteSolution& sol, int per_side) {
  const Layout& lay = dm.layout;
  const Vector2d c = mesh.circle_center;
  const double R = mesh.circle_radius;
  std::vector<GammaSample> out;
  for (int id : dm.topo.active) {
    const Element& el = mesh.elements[id];
    const VectorXd loc = dm.gather(id, sol.interface);
    for (int s = 0; s < 4; ++s) {
      const Edge& ed = mesh.edges[el.side[s]];
      const bool cyl = ed.tag == BoundaryTag::cylinder;
      const bool wake = ed.tag == BoundaryTag::reflective &&
                        std::min(mesh.vertices[ed.v[0]].x(), mesh.vertices[ed.v[1]].x()) >= c.x() + R - 1e-12;
      if (!cyl && !wake) continue;
      for (int k = 0; k < per_side; ++k) {
        const double t = -1 + (2.0 * k + 1) / per_side;
        const Vector2d ref = side_point(s, t);
        const MapPoint mp = ref_map_eval(mesh, id, ref.x(), ref.y());
        const FieldState<double> f = eval_fields(lay, sol.fields[id], ref.x(), ref.y());
        GammaSample g;
        g.x = mp.x.x();
        g.y = mp.x.y();
        g.T11 = f.T(0, 0);
        g.T12 = f.T(0, 1);
        g.T22 = f.T(1, 1);
        g.that1 = std::numeric_limits<double>::quiet_NaN();
        if (cyl) {
          const double theta = std::atan2(g.y - c.y(), g.x - c.x());
          g.s = R * (M_PI - theta);
          const Vector2d tan = mp.J * side_direction(s);
          const Vector2d n = Vector2d(tan.y(), -tan.x()).normalized(), tau(-n.y(), n.x());
          const VectorXd fl = edge_values(EdgeFamily::legendre, dm.orders.flux(), t);
          const int off = s * lay.side_dim;
          g.that1 = (fl.dot(loc.segment(off + lay.t_hat(0), lay.nfl)) * n +
                     fl.dot(loc.segment(off + lay.t_hat(1), lay.nfl)) * tau)(0);
        } else {
          g.s = M_PI * R + (g.x - (c.x() + R));
        }
        out.push_back(g);
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const GammaSample& a, const GammaSample& b) { return a.s < b.s; });
  return out;
}

double max_abs_T12_reflective(const Mesh& mesh, const DofMap& dm, const FieldVectors& fields, int per_side) {
  double mx = 0;
  for (int id : dm.topo.active) {
    const Element& el = mesh.elements[id];
    for (int s = 0; s < 4; ++s) {
      if (mesh.edges[el.side[s]].tag != BoundaryTag::reflective) continue;
      for (int k = 0; k < per_side; ++k) {
        const Vector2d ref = side_point(s, -1 + 2.0 * k / (per_side - 1));
        mx = std::max(mx, std::abs(eval_fields(dm.layout, fields[id], ref.x(), ref.y()).T(0, 1)));
      }
    }
  }
  return mx;
}

}  // namespace vdpg
