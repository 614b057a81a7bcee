#include "vdpg/mms.hpp"

#include <chrono>
#include <cmath>

#include "vdpg/nonlinear.hpp"

namespace vdpg {

using Eigen::Vector2d;
using Eigen::Vector3d;

SourceFn manufactured_source(const ModelParams& m, const ExactSolution& exact) {
  return [m, exact](const Vector2d& x) {
    Vec2<ADScalar> xa;
    xa(0) = ADScalar(x(0), 2, 0);
    xa(1) = ADScalar(x(1), 2, 1);
    const FieldState<ADScalar> s = exact.ad(xa);
    const Eigen::Matrix<double, comp::count, 1> w = pairing_weights();
    Eigen::Matrix<double, comp::count, 1> src;
    for (int c = 0; c < comp::count; ++c) {
      TestJet<ADScalar> jet;
      jet.val(c) = 1;
      double r = nonlinear_field_integrand(m, s, jet).value();
      for (int d = 0; d < 2; ++d) {
        TestJet<ADScalar> g;
        g.grad(c, d) = 1;
        r -= nonlinear_field_integrand(m, s, g).derivatives()(d);
      }
      src(c) = r / w(c);
    }
    return src;
  };
}

BoundaryConditions exact_boundary_conditions(const ModelParams& m, const ExactSolution& exact) {
  BoundaryConditions bc;
  for (BoundaryTag t : {BoundaryTag::inflow, BoundaryTag::outflow, BoundaryTag::wall, BoundaryTag::cylinder,
                        BoundaryTag::reflective}) {
    EdgeRule& r = bc[t];
    r.fix_u = {true, true};
    r.u_value = [exact](const Vector2d& x) { return Vector2d(exact.value(x).u); };
    if (m.lambda > 0) {
      r.fix_j = true;
      r.j_value = [exact](const Vector2d& x, const Vector2d& n) {
        const FieldState<double> s = exact.value(x);
        const double un = s.u.dot(n);
        return Vector3d(un * s.T(0, 0), un * s.T(0, 1), un * s.T(1, 1));
      };
    }
  }
  bc.fix_all_j = m.lambda == 0;
  return bc;
}

FieldErrors field_errors(const Mesh& mesh, const DofMap& dm, const FieldVectors& fields, const ExactSolution& exact,
                         int extra_points) {
  PolyOrders o = dm.orders;
  o.dp += extra_points;  // denser element rule
  double e[4] = {0, 0, 0, 0}, n[4] = {0, 0, 0, 0};
  for (int id : dm.topo.active) {
    const ElementQuadrature eq = element_quadrature(mesh, id, o);
    for (int q = 0; q < eq.npts; ++q) {
      const FieldState<double> h = eval_fields(dm.layout, fields[id], eq.ref(q, 0), eq.ref(q, 1));
      const FieldState<double> x = exact.value(eq.x.row(q).transpose());
      const double w = eq.w(q);
      e[0] += w * (h.u - x.u).squaredNorm();
      n[0] += w * x.u.squaredNorm();
      e[1] += w * (h.p - x.p) * (h.p - x.p);
      n[1] += w * x.p * x.p;
      e[2] += w * (h.L - x.L).squaredNorm();
      n[2] += w * x.L.squaredNorm();
      e[3] += w * (h.T - x.T).squaredNorm();
      n[3] += w * x.T.squaredNorm();
    }
  }
  auto rel = [](double a, double b) { return b > 0 ? std::sqrt(a / b) : std::sqrt(a); };
  FieldErrors f;
  f.u = std::sqrt(e[0]);
  f.p = std::sqrt(e[1]);
  f.L = std::sqrt(e[2]);
  f.T = std::sqrt(e[3]);
  f.u_rel = rel(e[0], n[0]);
  f.p_rel = rel(e[1], n[1]);
  f.L_rel = rel(e[2], n[2]);
  f.T_rel = rel(e[3], n[3]);
  f.total = std::sqrt(e[0] + e[1] + e[2] + e[3]);
  f.total_rel = rel(e[0] + e[1] + e[2] + e[3], n[0] + n[1] + n[2] + n[3]);
  return f;
}

std::vector<ConvergenceLevel> convergence_study(const ModelParams& m, const ExactSolution& exact, const Mesh& base,
                                                int levels, const PolyOrders& orders) {
  using clock = std::chrono::steady_clock;
  std::vector<ConvergenceLevel> out;
  const SourceFn src = manufactured_source(m, exact);
  LocalExtras extras;
  extras.source = &src;
  Mesh mesh = base;
  for (int k = 0; k <= levels; ++k) {
    const auto t0 = clock::now();
    if (k > 0) mesh = refine_uniform(mesh);
    const DofMap dm = build_dofmap(mesh, exact_boundary_conditions(m, exact), orders);
    const NewtonResult r = gauss_newton(mesh, dm, m, {}, extras);
    if (r.report.failed) throw std::runtime_error("convergence_study: level " + std::to_string(k) + ": " + r.report.failure);
    ConvergenceLevel c;
    c.level = k;
    c.dof = dm.total_dofs();
    c.elements = dm.topo.active.size();
    for (int id : dm.topo.active) {
      const auto& v = mesh.elements[id].v;
      for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b) c.h = std::max(c.h, (mesh.vertices[v[a]] - mesh.vertices[v[b]]).norm());
    }
    c.err = field_errors(mesh, dm, r.fields, exact);
    c.newton_iters = r.report.linear_solves();
    if (!out.empty()) c.rate = std::log(out.back().err.total / c.err.total) / std::log(out.back().h / c.h);
    c.seconds = std::chrono::duration<double>(clock::now() - t0).count();
    out.push_back(c);
  }
  return out;
}

ExactSolution polynomial_newtonian(const ModelParams& m) {
  const double ep = m.eta_p;
  return make_exact("polynomial_newtonian", [ep](const auto& x) {
    using S = typename std::decay_t<decltype(x)>::Scalar;
    FieldState<S> s;
    s.u << x(1) * x(1), x(0) * x(0);
    s.p = x(0) * x(1) - 0.25;
    s.L << S(0), 2 * x(1), 2 * x(0), S(0);
    s.T = ep * (s.L + s.L.transpose());
    return s;
  });
}

ExactSolution smooth_stokes(const ModelParams& m) {
  const double ep = m.eta_p;
  return make_exact("smooth_stokes", [ep](const auto& x) {
    using S = typename std::decay_t<decltype(x)>::Scalar;
    using std::cos;
    using std::sin;
    const double pi = M_PI;
    const S sx = sin(pi * x(0)), cx = cos(pi * x(0)), sy = sin(pi * x(1)), cy = cos(pi * x(1));
    FieldState<S> s;
    s.u << sx * cy, -cx * sy;
    s.p = cx * cy;
    s.L << pi * cx * cy, -pi * sx * sy, pi * sx * sy, -pi * cx * cy;
    s.T = ep * (s.L + s.L.transpose());
    return s;
  });
}

ExactSolution smooth_viscoelastic() {
  return make_exact("smooth_viscoelastic", [](const auto& x) {
    using S = typename std::decay_t<decltype(x)>::Scalar;
    using std::cos;
    using std::exp;
    using std::sin;
    const S sx = sin(x(0)), cx = cos(x(0)), sy = sin(2.0 * x(1)), cy = cos(2.0 * x(1));
    FieldState<S> s;
    s.u << 2.0 * sx * cy, -cx * sy;  // divergence free
    s.p = exp(x(0)) * x(1) - 1.0;
    s.L << 2.0 * cx * cy, -4.0 * sx * sy, sx * sy, -2.0 * cx * cy;
    s.T << 1.0 + x(0) * x(1), 0.5 * sin(x(0) + x(1)), 0.5 * sin(x(0) + x(1)), cos(x(1)) - 0.5;
    return s;
  });
}

}  // namespace vdpg
